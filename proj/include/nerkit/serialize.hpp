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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "nerkit/model.hpp"

namespace nerkit {

// Model archive, version 1. Little-endian throughout; doubles stored as
// IEEE-754 bit patterns in little-endian u64. Layout:
//
//   magic "NERKITA1"
//   u32  format version (1)
//   str  model type ("lstm-crf" | "stack-lstm")
//   str  config (key=value lines)
//   u64  word count,  then per word: str surface, u64 frequency
//   u64  char count,  then per char: u32 codepoint
//   u64  tag count,   then per tag:  str
//   u64  parameter count, then per parameter:
//        str name, u32 rank, u32 dims[rank], f64 values (row-major)
//
// str = u32 byte length + bytes (UTF-8).
inline constexpr char kArchiveMagic[8] = {'N', 'E', 'R', 'K',
                                          'I', 'T', 'A', '1'};
inline constexpr std::uint32_t kArchiveVersion = 1;

namespace bin {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

inline void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }

  std::string str() {
    std::uint32_t len = u32();
    need(len);
    std::string s = data_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw std::runtime_error("model archive truncated or corrupt");
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace bin

inline std::string save_model(const Model& model) {
  std::string out;
  out.append(kArchiveMagic, sizeof(kArchiveMagic));
  bin::put_u32(out, kArchiveVersion);
  bin::put_str(out, model.model_type());
  bin::put_str(out, config_to_text(model.config()));

  const Vocabulary& v = model.vocab();
  bin::put_u64(out, static_cast<std::uint64_t>(v.words.size()));
  for (std::size_t i = 0; i < v.words.size(); ++i) {
    bin::put_str(out, v.words[i]);
    bin::put_u64(out, v.word_freq[i]);
  }
  bin::put_u64(out, static_cast<std::uint64_t>(v.chars.size()));
  for (std::uint32_t cp : v.chars) bin::put_u32(out, cp);
  bin::put_u64(out, static_cast<std::uint64_t>(v.tags.size()));
  for (const std::string& t : v.tags) bin::put_str(out, t);

  const auto& params = model.params().all();
  bin::put_u64(out, static_cast<std::uint64_t>(params.size()));
  for (const auto& p : params) {
    bin::put_str(out, p->name);
    bin::put_u32(out, static_cast<std::uint32_t>(p->value.shape.size()));
    for (int d : p->value.shape)
      bin::put_u32(out, static_cast<std::uint32_t>(d));
    for (double x : p->value.values) bin::put_f64(out, x);
  }
  return out;
}

inline std::unique_ptr<Model> load_model(const std::string& bytes) {
  if (bytes.size() < sizeof(kArchiveMagic) ||
      std::memcmp(bytes.data(), kArchiveMagic, sizeof(kArchiveMagic)) != 0)
    throw std::runtime_error("not a model archive (bad magic)");
  bin::Reader r(bytes.substr(sizeof(kArchiveMagic)));
  std::uint32_t version = r.u32();
  if (version != kArchiveVersion)
    throw std::runtime_error("unsupported archive version " +
                             std::to_string(version));
  std::string model_type = r.str();
  RunConfig cfg;
  config_apply_text(cfg, r.str());
  if (cfg.model != model_type)
    throw std::runtime_error("archive model type mismatch");

  Vocabulary vocab;
  std::uint64_t n_words = r.u64();
  for (std::uint64_t i = 0; i < n_words; ++i) {
    vocab.words.push_back(r.str());
    vocab.word_freq.push_back(r.u64());
  }
  std::uint64_t n_chars = r.u64();
  for (std::uint64_t i = 0; i < n_chars; ++i) vocab.chars.push_back(r.u32());
  std::uint64_t n_tags = r.u64();
  for (std::uint64_t i = 0; i < n_tags; ++i) vocab.tags.push_back(r.str());
  vocab.rebuild_maps();

  // Rebuild the model skeleton, then overwrite every parameter from the
  // archive; the throwaway init draws do not affect the result.
  Rng init_rng(0);
  std::unique_ptr<Model> model = make_model(cfg, std::move(vocab), init_rng);

  std::uint64_t n_params = r.u64();
  if (n_params != model->params().all().size())
    throw std::runtime_error("archive parameter count mismatch");
  for (std::uint64_t i = 0; i < n_params; ++i) {
    std::string name = r.str();
    Parameter* p = model->params().find(name);
    if (!p) throw std::runtime_error("archive has unknown parameter " + name);
    std::uint32_t rank = r.u32();
    std::vector<int> shape;
    for (std::uint32_t d = 0; d < rank; ++d)
      shape.push_back(static_cast<int>(r.u32()));
    if (shape != p->value.shape)
      throw std::runtime_error("archive shape mismatch for " + name);
    for (double& x : p->value.values) x = r.f64();
  }
  if (!r.done())
    throw std::runtime_error("model archive has trailing bytes");
  return model;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace nerkit
