// Copyright 2026 the nerkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nerkit/corpus.hpp"
#include "nerkit/rnn.hpp"

namespace nerkit {

enum class Mode { Train, Eval };

struct WordRepConfig {
  int word_dim = 100;
  int char_dim = 25;
  int char_hidden = 25;  // per direction; char representation is 2x this
  bool use_char = true;
  double dropout = 0.5;
};

// Inverted dropout: zero with probability `rate`, otherwise scale by
// 1/(1-rate), so eval-mode activations equal the train-mode expectation.
inline Var apply_dropout(Tape& t, Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  const Tensor& xv = t.value(x);
  Tensor mask = Tensor::zeros(xv.shape);
  double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values) m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return t.hadamard(x, t.constant(std::move(mask)));
}

struct PretrainedLoad {
  int file_vectors = 0;
  int matched = 0;
  int matched_lowercase = 0;
  int missing = 0;  // rows left at their random initialization
};

// Per-token input layer: character-BiLSTM representation concatenated with a
// word lookup embedding, under dropout. Both model families share this.
class WordRep {
 public:
  static WordRep create(ParameterStore& ps, const Vocabulary& vocab,
                        const WordRepConfig& cfg, Rng& rng) {
    WordRep w;
    w.cfg_ = cfg;
    w.vocab_ = &vocab;
    w.word_table_ = &ps.add(
        "wordrep/word_embeddings",
        uniform_init({vocab.word_count(), cfg.word_dim}, cfg.word_dim, rng));
    w.row_pretrained_.assign(static_cast<std::size_t>(vocab.word_count()),
                             false);
    if (cfg.use_char) {
      w.char_table_ = &ps.add(
          "wordrep/char_embeddings",
          uniform_init({vocab.char_count(), cfg.char_dim}, cfg.char_dim, rng));
      w.char_bilstm_ = BiLSTM::create(ps, "wordrep/char", cfg.char_dim,
                                      cfg.char_hidden, rng);
    }
    return w;
  }

  const WordRepConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return *vocab_; }
  Parameter& word_table() { return *word_table_; }

  int output_dim() const {
    return cfg_.word_dim + (cfg_.use_char ? 2 * cfg_.char_hidden : 0);
  }

  bool row_pretrained(int word_id) const {
    return row_pretrained_[static_cast<std::size_t>(word_id)];
  }

  // Character-level word representation: concatenation of the final forward
  // and backward char-LSTM states. Unknown characters map to the UNK char.
  Var char_compose(Tape& t, const std::string& word) const {
    if (!cfg_.use_char)
      throw std::logic_error("char_compose: character model disabled");
    if (word.empty()) throw std::domain_error("char_compose: empty word");
    std::vector<Var> xs;
    for (std::uint32_t cp : utf8::codepoints(word))
      xs.push_back(t.param_row(*char_table_, vocab_->char_id(cp)));
    return bilstm_final_concat(t, char_bilstm_, xs);
  }

  // Final per-token embedding. In train mode a singleton word is swapped for
  // UNK with probability 0.5 before lookup, and the dropout mask is applied
  // to the concatenated vector; rng is required in train mode.
  Var embed(Tape& t, const Token& token, Mode mode, Rng* rng = nullptr) const {
    if (mode == Mode::Train && rng == nullptr)
      throw std::logic_error("embed: train mode needs an rng");
    int wid = vocab_->word_id(token.normalized);
    if (mode == Mode::Train && wid != Vocabulary::kUnkId &&
        vocab_->is_singleton(wid) && rng->bernoulli(0.5))
      wid = Vocabulary::kUnkId;
    Var word = t.param_row(*word_table_, wid);
    Var x = cfg_.use_char
                ? t.concat(char_compose(t, token.normalized), word)
                : word;
    if (mode == Mode::Train) x = apply_dropout(t, x, cfg_.dropout, *rng);
    return x;
  }

  // Reads a text embedding file (optional "count dim" header, then one word
  // and dim floats per line) into the lookup table. Vocabulary words are
  // matched case-sensitively first, then lowercased; unmatched rows keep
  // their random initialization. The table stays trainable.
  PretrainedLoad load_pretrained(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    std::unordered_map<std::string, std::vector<double>> table;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream iss(line);
      if (first) {
        first = false;
        long long count, dim;
        std::istringstream probe(line);
        std::string a, b, rest;
        if (probe >> a >> b && !(probe >> rest) && parse_ll(a, count) &&
            parse_ll(b, dim)) {
          if (dim != cfg_.word_dim)
            throw ParseError(line_no, "embedding dimension " +
                                          std::to_string(dim) +
                                          " does not match configured " +
                                          std::to_string(cfg_.word_dim));
          continue;  // header line
        }
      }
      std::string word;
      iss >> word;
      std::vector<double> v;
      v.reserve(static_cast<std::size_t>(cfg_.word_dim));
      std::string tok;
      while (iss >> tok) {
        double d;
        if (!parse_double(tok, d))
          throw ParseError(line_no, "malformed float: " + tok);
        v.push_back(d);
      }
      if (static_cast<int>(v.size()) != cfg_.word_dim)
        throw ParseError(line_no, "expected " + std::to_string(cfg_.word_dim) +
                                      " values, got " +
                                      std::to_string(v.size()));
      table.emplace(std::move(word), std::move(v));
    }

    PretrainedLoad report;
    report.file_vectors = static_cast<int>(table.size());
    for (int id = 0; id < vocab_->word_count(); ++id) {
      const std::string& w = vocab_->words[static_cast<std::size_t>(id)];
      auto it = table.find(w);
      bool lowered = false;
      if (it == table.end()) {
        it = table.find(to_lower(w));
        lowered = it != table.end();
      }
      if (it == table.end()) {
        ++report.missing;
        continue;
      }
      for (int j = 0; j < cfg_.word_dim; ++j)
        word_table_->value.at(id, j) = it->second[static_cast<std::size_t>(j)];
      row_pretrained_[static_cast<std::size_t>(id)] = true;
      ++report.matched;
      if (lowered) ++report.matched_lowercase;
    }
    return report;
  }

 private:
  static bool parse_ll(const std::string& s, long long& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
      out = std::stoll(s, &pos);
    } catch (...) {
      return false;
    }
    return pos == s.size();
  }

  static bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
      out = std::stod(s, &pos);
    } catch (...) {
      return false;
    }
    return pos == s.size();
  }

  static std::string to_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }

  WordRepConfig cfg_;
  const Vocabulary* vocab_ = nullptr;
  Parameter* word_table_ = nullptr;
  Parameter* char_table_ = nullptr;
  BiLSTM char_bilstm_;
  std::vector<bool> row_pretrained_;
};

}  // namespace nerkit
