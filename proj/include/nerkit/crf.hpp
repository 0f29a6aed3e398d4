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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nerkit/model_base.hpp"
#include "nerkit/wordrep.hpp"

namespace nerkit {

// Transition matrix layout: A is (k+2)x(k+2) over tag ids 0..k-1 plus the
// start row k and end column k+1. Transitions into start and out of end are
// never referenced.
inline int crf_start_index(int k) { return k; }
inline int crf_end_index(int k) { return k + 1; }

// s(X, y): n+1 transition scores (start->y_1, ..., y_n->end) plus n emission
// scores, on the tape.
inline Var crf_sequence_score(Tape& t, const std::vector<Var>& emissions,
                              Var transitions, const std::vector<int>& y) {
  if (emissions.empty())
    throw std::domain_error("crf_sequence_score: empty sentence");
  if (y.size() != emissions.size())
    throw std::domain_error("crf_sequence_score: tag/word count mismatch");
  int k = t.value(emissions[0]).rows();
  for (int tag : y)
    if (tag < 0 || tag >= k)
      throw std::domain_error("crf_sequence_score: tag id out of range");
  Var s = t.add(t.element(transitions, crf_start_index(k), y[0]),
                t.pick(emissions[0], y[0]));
  for (std::size_t i = 1; i < y.size(); ++i) {
    s = t.add(s, t.element(transitions, y[i - 1], y[i]));
    s = t.add(s, t.pick(emissions[i], y[i]));
  }
  s = t.add(s, t.element(transitions, y.back(), crf_end_index(k)));
  return s;
}

// log sum over all k^n tag sequences of exp(s(X, y)), including sequences
// that violate the tagging scheme; forward recursion in O(n k^2).
inline Var crf_log_partition(Tape& t, const std::vector<Var>& emissions,
                             Var transitions) {
  if (emissions.empty())
    throw std::domain_error("crf_log_partition: empty sentence");
  int k = t.value(emissions[0]).rows();
  Var alpha = t.add(t.slice(t.row(transitions, crf_start_index(k)), 0, k),
                    emissions[0]);
  for (std::size_t i = 1; i < emissions.size(); ++i) {
    std::vector<Var> next;
    next.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      Var into_j = t.slice(t.column(transitions, j), 0, k);
      next.push_back(t.logsumexp(t.add(alpha, into_j)));
    }
    alpha = t.add(t.stack(next), emissions[i]);
  }
  Var to_end = t.slice(t.column(transitions, crf_end_index(k)), 0, k);
  return t.logsumexp(t.add(alpha, to_end));
}

// -log p(y | X) = log_partition - sequence_score; always >= 0.
inline Var crf_nll(Tape& t, const std::vector<Var>& emissions, Var transitions,
                   const std::vector<int>& gold) {
  return t.sub(crf_log_partition(t, emissions, transitions),
               crf_sequence_score(t, emissions, transitions, gold));
}

struct ViterbiResult {
  std::vector<int> tags;
  double score = 0.0;
};

// Allowed-transition mask over the (k+2)x(k+2) layout for constrained
// decoding; absent rules mean everything is allowed.
inline std::vector<bool> scheme_transition_mask(
    const std::vector<std::string>& tags, TagScheme scheme) {
  int k = static_cast<int>(tags.size());
  int start = crf_start_index(k), end = crf_end_index(k);
  std::vector<detail::TagParts> parts(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) detail::split_tag(tags[static_cast<std::size_t>(i)], parts[static_cast<std::size_t>(i)]);
  auto allowed_pair = [&](int from, int to) -> bool {
    // from == start acts like O for openings; to == end requires closure
    if (to == end) {
      if (from == start) return true;
      char p = parts[static_cast<std::size_t>(from)].prefix;
      if (scheme == TagScheme::IOBES) return p == 'O' || p == 'E' || p == 'S';
      return true;
    }
    const detail::TagParts& t = parts[static_cast<std::size_t>(to)];
    char fp = 'O';
    std::string fl;
    if (from != start) {
      fp = parts[static_cast<std::size_t>(from)].prefix;
      fl = parts[static_cast<std::size_t>(from)].label;
    }
    switch (scheme) {
      case TagScheme::IOBES:
        if (t.prefix == 'I' || t.prefix == 'E')
          return (fp == 'B' || fp == 'I') && fl == t.label;
        return fp == 'O' || fp == 'E' || fp == 'S';
      case TagScheme::IOB2:
        if (t.prefix == 'I')
          return (fp == 'B' || fp == 'I') && fl == t.label;
        return true;
      case TagScheme::IOB1:
        if (t.prefix == 'B')
          return (fp == 'B' || fp == 'I') && fl == t.label;
        return true;
    }
    return true;
  };
  int kk = k + 2;
  std::vector<bool> mask(static_cast<std::size_t>(kk) * kk, false);
  for (int i = 0; i < kk; ++i)
    for (int j = 0; j < kk; ++j)
      if (i != end && j != start)
        mask[static_cast<std::size_t>(i) * kk + j] = allowed_pair(i, j);
  return mask;
}

// Max-score sequence by dynamic programming with backpointers; ties break
// toward the lowest tag index. P is n x k, A is (k+2)x(k+2).
inline ViterbiResult viterbi_decode(const Tensor& P, const Tensor& A,
                                    const std::vector<bool>* allowed = nullptr) {
  if (P.rank() != 2 || P.rows() < 1)
    throw std::domain_error("viterbi_decode: empty or malformed emissions");
  int n = P.rows(), k = P.cols();
  int kk = k + 2;
  if (A.rank() != 2 || A.rows() != kk || A.cols() != kk)
    throw std::invalid_argument("viterbi_decode: transition matrix must be (k+2)^2");
  const double ninf = -std::numeric_limits<double>::infinity();
  int start = crf_start_index(k), end = crf_end_index(k);
  auto ok = [&](int i, int j) {
    return !allowed || (*allowed)[static_cast<std::size_t>(i) * kk + j];
  };

  std::vector<double> prev(static_cast<std::size_t>(k)), cur(static_cast<std::size_t>(k));
  std::vector<int> back(static_cast<std::size_t>(n) * k, 0);
  for (int j = 0; j < k; ++j)
    prev[static_cast<std::size_t>(j)] =
        ok(start, j) ? A.at(start, j) + P.at(0, j) : ninf;
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < k; ++j) {
      double best = ninf;
      int best_i = 0;
      for (int i = 0; i < k; ++i) {
        if (!ok(i, j)) continue;
        double v = prev[static_cast<std::size_t>(i)] + A.at(i, j);
        if (v > best) {
          best = v;
          best_i = i;
        }
      }
      cur[static_cast<std::size_t>(j)] = best + P.at(t, j);
      back[static_cast<std::size_t>(t) * k + j] = best_i;
    }
    std::swap(prev, cur);
  }
  double best = ninf;
  int best_j = 0;
  for (int j = 0; j < k; ++j) {
    if (!ok(j, end)) continue;
    double v = prev[static_cast<std::size_t>(j)] + A.at(j, end);
    if (v > best) {
      best = v;
      best_j = j;
    }
  }
  ViterbiResult r;
  r.score = best;
  r.tags.assign(static_cast<std::size_t>(n), 0);
  r.tags[static_cast<std::size_t>(n) - 1] = best_j;
  for (int t = n - 1; t > 0; --t)
    r.tags[static_cast<std::size_t>(t) - 1] =
        back[static_cast<std::size_t>(t) * k + r.tags[static_cast<std::size_t>(t)]];
  return r;
}

// Sums exp(score(y) - log_partition) over every tag sequence by direct
// enumeration; the result is 1 exactly when the forward DP normalizes the
// enumerated scores. Guarded to k^n <= 10^6.
inline double marginal_check(const Tensor& P, const Tensor& A) {
  if (P.rank() != 2 || P.rows() < 1)
    throw std::domain_error("marginal_check: empty or malformed emissions");
  int n = P.rows(), k = P.cols();
  double total_seqs = std::pow(static_cast<double>(k), n);
  if (total_seqs > 1e6)
    throw std::domain_error("marginal_check: instance too large (k^n > 1e6)");
  int start = crf_start_index(k), end = crf_end_index(k);

  Tape t;
  std::vector<Var> em;
  for (int i = 0; i < n; ++i) {
    Tensor row = Tensor::zeros({k});
    for (int j = 0; j < k; ++j) row.at(j) = P.at(i, j);
    em.push_back(t.constant(std::move(row)));
  }
  double log_z = t.scalar_value(crf_log_partition(t, em, t.constant(A)));

  std::vector<int> y(static_cast<std::size_t>(n), 0);
  double mass = 0.0;
  while (true) {
    double s = A.at(start, y[0]) + P.at(0, y[0]);
    for (int i = 1; i < n; ++i) {
      s = s + A.at(y[static_cast<std::size_t>(i) - 1], y[static_cast<std::size_t>(i)]);
      s = s + P.at(i, y[static_cast<std::size_t>(i)]);
    }
    s = s + A.at(y[static_cast<std::size_t>(n) - 1], end);
    mass += std::exp(s - log_z);
    int pos = n - 1;
    while (pos >= 0 && ++y[static_cast<std::size_t>(pos)] == k) {
      y[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return mass;
}

// The LSTM-CRF tagger: word representations -> single-layer BiLSTM -> hidden
// projection to per-tag emission scores, combined with learned transition
// scores; trained by sentence-level negative log-likelihood, decoded by
// Viterbi.
class CrfTagger : public Model {
 public:
  CrfTagger(const RunConfig& cfg, Vocabulary vocab, Rng& rng)
      : cfg_(cfg), vocab_(std::move(vocab)) {
    cfg_.model = "lstm-crf";
    scheme_ = *scheme_from_name(cfg_.scheme);
    WordRepConfig wc;
    wc.word_dim = cfg_.word_dim;
    wc.char_dim = cfg_.char_dim;
    wc.char_hidden = cfg_.char_hidden;
    wc.use_char = cfg_.use_char;
    wc.dropout = cfg_.resolved_dropout();
    wordrep_ = WordRep::create(params_, vocab_, wc, rng);
    context_ = BiLSTM::create(params_, "bilstm", wordrep_.output_dim(),
                              cfg_.hidden, rng, cfg_.full_peephole);
    int k = vocab_.tag_count();
    proj_W1_ = &params_.add(
        "proj/W1", uniform_init({cfg_.proj_hidden, context_.output_dim()},
                                context_.output_dim(), rng));
    proj_b1_ = &params_.add("proj/b1", Tensor::zeros({cfg_.proj_hidden}));
    proj_W2_ = &params_.add(
        "proj/W2", uniform_init({k, cfg_.proj_hidden}, cfg_.proj_hidden, rng));
    proj_b2_ = &params_.add("proj/b2", Tensor::zeros({k}));
    transitions_ = &params_.add("crf/transitions",
                                Tensor::zeros({k + 2, k + 2}));
  }

  const char* model_type() const override { return "lstm-crf"; }
  const RunConfig& config() const override { return cfg_; }
  const Vocabulary& vocab() const override { return vocab_; }
  ParameterStore& params() override { return params_; }
  WordRep& wordrep() override { return wordrep_; }
  Parameter& transitions() { return *transitions_; }
  TagScheme scheme() const { return scheme_; }

  // n x k emission scores as one tape vector per token.
  std::vector<Var> emissions(Tape& t, const Sentence& s, Mode mode,
                             Rng* rng = nullptr) const {
    if (s.tokens.empty()) throw std::domain_error("emissions: empty sentence");
    std::vector<Var> xs;
    xs.reserve(s.tokens.size());
    for (const Token& tok : s.tokens)
      xs.push_back(wordrep_.embed(t, tok, mode, rng));
    std::vector<Var> ctx = bilstm_encode(t, context_, xs);
    std::vector<Var> rows;
    rows.reserve(ctx.size());
    for (Var c : ctx) {
      Var h = t.tanh(t.add(t.matvec(t.param(*proj_W1_), c),
                           t.param(*proj_b1_)));
      rows.push_back(t.add(t.matvec(t.param(*proj_W2_), h),
                           t.param(*proj_b2_)));
    }
    return rows;
  }

  Var example_loss(Tape& t, const Example& ex, Rng& rng) override {
    std::vector<Var> em = emissions(t, ex.sentence, Mode::Train, &rng);
    return crf_nll(t, em, t.param(*transitions_), ex.gold_tag_ids);
  }

  ViterbiResult decode(const Sentence& s) const {
    Tape t;
    std::vector<Var> em = emissions(t, s, Mode::Eval);
    int n = static_cast<int>(em.size());
    int k = vocab_.tag_count();
    Tensor P = Tensor::zeros({n, k});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) P.at(i, j) = t.value(em[static_cast<std::size_t>(i)]).at(j);
    if (cfg_.constrain_decode) {
      std::vector<bool> mask = scheme_transition_mask(vocab_.tags, scheme_);
      return viterbi_decode(P, transitions_->value, &mask);
    }
    return viterbi_decode(P, transitions_->value);
  }

  std::vector<std::string> predict_tags(const Sentence& s) const override {
    ViterbiResult r = decode(s);
    std::vector<std::string> tags;
    tags.reserve(r.tags.size());
    for (int id : r.tags) tags.push_back(vocab_.tags[static_cast<std::size_t>(id)]);
    return tags;
  }

  std::vector<LabeledChunk> predict_chunks(const Sentence& s) const override {
    // decoded sequences may violate the scheme; read them leniently
    return tags_to_chunks_lenient(predict_tags(s));
  }

 private:
  RunConfig cfg_;
  Vocabulary vocab_;
  ParameterStore params_;
  WordRep wordrep_;
  BiLSTM context_;
  Parameter* proj_W1_ = nullptr;
  Parameter* proj_b1_ = nullptr;
  Parameter* proj_W2_ = nullptr;
  Parameter* proj_b2_ = nullptr;
  Parameter* transitions_ = nullptr;
  TagScheme scheme_ = TagScheme::IOBES;
};

}  // namespace nerkit
