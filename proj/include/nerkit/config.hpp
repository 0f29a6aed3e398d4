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

#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nerkit {

// All knobs for a training or tagging run. Defaults reproduce the English
// settings: word dim 100, char LSTMs 25+25, hidden 100, lr 0.01, clip 5.0,
// dropout 0.5 (lstm-crf) / 0.2 (stack-lstm).
struct RunConfig {
  std::string model = "lstm-crf";  // lstm-crf | stack-lstm
  std::string scheme = "iobes";    // tag scheme used for training/output
  std::string input_scheme = "auto";  // scheme of input files, auto-detected

  int word_dim = 100;
  int char_dim = 25;
  int char_hidden = 25;
  int hidden = 100;        // tagger BiLSTM hidden size per direction
  int proj_hidden = 100;   // hidden layer between contexts and tag scores
  int stack_hidden = 100;  // chunker stack-LSTM hidden size
  int stack_layers = 2;
  int action_dim = 16;
  int chunk_dim = 20;      // composed chunk representation size
  int state_hidden = 100;  // rectified layer before the action softmax

  double dropout = -1.0;  // <0 resolves per model: 0.5 lstm-crf, 0.2 chunker
  bool use_char = true;
  bool digit_norm = true;
  bool full_peephole = false;
  bool constrain_decode = false;
  std::string pretrained;  // embedding file; empty = random initialization

  double learning_rate = 0.01;
  double clip = 5.0;
  int epochs = 100;
  double early_stop_f1 = -1.0;  // stop once dev F1 reaches this; <0 disables
  std::uint64_t seed = 1;
  std::uint64_t min_word_freq = 1;

  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string out_path;

  double resolved_dropout() const {
    if (dropout >= 0.0) return dropout;
    return model == "lstm-crf" ? 0.5 : 0.2;
  }

  void validate() const {
    if (model != "lstm-crf" && model != "stack-lstm")
      throw std::invalid_argument("config: unknown model '" + model + "'");
    if (scheme != "iob2" && scheme != "iobes")
      throw std::invalid_argument("config: scheme must be iob2 or iobes");
    if (input_scheme != "auto" && input_scheme != "iob1" &&
        input_scheme != "iob2" && input_scheme != "iobes")
      throw std::invalid_argument("config: bad input_scheme '" + input_scheme +
                                  "'");
    if (word_dim <= 0 || char_dim <= 0 || char_hidden <= 0 || hidden <= 0 ||
        proj_hidden <= 0 || stack_hidden <= 0 || stack_layers <= 0 ||
        action_dim <= 0 || chunk_dim <= 0 || chunk_dim % 2 != 0 ||
        state_hidden <= 0)
      throw std::invalid_argument(
          "config: dimensions must be positive (chunk_dim also even)");
    if (resolved_dropout() < 0.0 || resolved_dropout() >= 1.0)
      throw std::invalid_argument("config: dropout must be in [0, 1)");
    if (learning_rate <= 0.0)
      throw std::invalid_argument("config: learning_rate must be positive");
    if (clip <= 0.0)
      throw std::invalid_argument("config: clip must be positive");
    if (epochs <= 0)
      throw std::invalid_argument("config: epochs must be positive");
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
bool parse_num(const std::string& s, T& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace detail

// Applies one key=value pair; throws std::invalid_argument naming the key on
// unknown keys or unparsable values.
inline void config_set(RunConfig& c, const std::string& key,
                       const std::string& value) {
  using detail::parse_bool;
  using detail::parse_num;
  auto bad = [&]() {
    throw std::invalid_argument("config: bad value for key '" + key + "': '" +
                                value + "'");
  };
  auto set_int = [&](int& field) {
    if (!parse_num(value, field)) bad();
  };
  auto set_u64 = [&](std::uint64_t& field) {
    if (!parse_num(value, field)) bad();
  };
  auto set_double = [&](double& field) {
    try {
      std::size_t pos = 0;
      field = std::stod(value, &pos);
      if (pos != value.size()) bad();
    } catch (const std::invalid_argument&) {
      bad();
    }
  };
  auto set_bool = [&](bool& field) {
    if (!parse_bool(value, field)) bad();
  };

  if (key == "model")
    c.model = value;
  else if (key == "scheme")
    c.scheme = value;
  else if (key == "input_scheme")
    c.input_scheme = value;
  else if (key == "word_dim")
    set_int(c.word_dim);
  else if (key == "char_dim")
    set_int(c.char_dim);
  else if (key == "char_hidden")
    set_int(c.char_hidden);
  else if (key == "hidden")
    set_int(c.hidden);
  else if (key == "proj_hidden")
    set_int(c.proj_hidden);
  else if (key == "stack_hidden")
    set_int(c.stack_hidden);
  else if (key == "stack_layers")
    set_int(c.stack_layers);
  else if (key == "action_dim")
    set_int(c.action_dim);
  else if (key == "chunk_dim")
    set_int(c.chunk_dim);
  else if (key == "state_hidden")
    set_int(c.state_hidden);
  else if (key == "dropout")
    set_double(c.dropout);
  else if (key == "use_char")
    set_bool(c.use_char);
  else if (key == "digit_norm")
    set_bool(c.digit_norm);
  else if (key == "full_peephole")
    set_bool(c.full_peephole);
  else if (key == "constrain_decode")
    set_bool(c.constrain_decode);
  else if (key == "pretrained")
    c.pretrained = value;
  else if (key == "learning_rate")
    set_double(c.learning_rate);
  else if (key == "clip")
    set_double(c.clip);
  else if (key == "epochs")
    set_int(c.epochs);
  else if (key == "early_stop_f1")
    set_double(c.early_stop_f1);
  else if (key == "seed")
    set_u64(c.seed);
  else if (key == "min_word_freq")
    set_u64(c.min_word_freq);
  else if (key == "train")
    c.train_path = value;
  else if (key == "dev")
    c.dev_path = value;
  else if (key == "test")
    c.test_path = value;
  else if (key == "out")
    c.out_path = value;
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

// Line-oriented key=value text; '#' starts a comment, blank lines ignored.
inline void config_apply_text(RunConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line +
                                  "'");
    auto trim = [](std::string s) {
      std::size_t b2 = s.find_first_not_of(" \t");
      if (b2 == std::string::npos) return std::string();
      std::size_t e2 = s.find_last_not_of(" \t");
      return s.substr(b2, e2 - b2 + 1);
    };
    config_set(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

// Deterministic key=value dump (sorted keys); round-trips through
// config_apply_text.
inline std::string config_to_text(const RunConfig& c) {
  using detail::fmt_double;
  std::map<std::string, std::string> kv;
  kv["model"] = c.model;
  kv["scheme"] = c.scheme;
  kv["input_scheme"] = c.input_scheme;
  kv["word_dim"] = std::to_string(c.word_dim);
  kv["char_dim"] = std::to_string(c.char_dim);
  kv["char_hidden"] = std::to_string(c.char_hidden);
  kv["hidden"] = std::to_string(c.hidden);
  kv["proj_hidden"] = std::to_string(c.proj_hidden);
  kv["stack_hidden"] = std::to_string(c.stack_hidden);
  kv["stack_layers"] = std::to_string(c.stack_layers);
  kv["action_dim"] = std::to_string(c.action_dim);
  kv["chunk_dim"] = std::to_string(c.chunk_dim);
  kv["state_hidden"] = std::to_string(c.state_hidden);
  kv["dropout"] = fmt_double(c.dropout);
  kv["use_char"] = c.use_char ? "true" : "false";
  kv["digit_norm"] = c.digit_norm ? "true" : "false";
  kv["full_peephole"] = c.full_peephole ? "true" : "false";
  kv["constrain_decode"] = c.constrain_decode ? "true" : "false";
  kv["pretrained"] = c.pretrained;
  kv["learning_rate"] = fmt_double(c.learning_rate);
  kv["clip"] = fmt_double(c.clip);
  kv["epochs"] = std::to_string(c.epochs);
  kv["early_stop_f1"] = fmt_double(c.early_stop_f1);
  kv["seed"] = std::to_string(c.seed);
  kv["min_word_freq"] = std::to_string(c.min_word_freq);
  kv["train"] = c.train_path;
  kv["dev"] = c.dev_path;
  kv["test"] = c.test_path;
  kv["out"] = c.out_path;
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace nerkit
