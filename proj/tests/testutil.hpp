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
#include <functional>
#include <string>
#include <vector>

#include "nerkit/corpus.hpp"
#include "nerkit/crf.hpp"
#include "nerkit/rng.hpp"
#include "nerkit/tape.hpp"

namespace testutil {

using nerkit::LabeledChunk;
using nerkit::ParameterStore;
using nerkit::Rng;
using nerkit::Sentence;
using nerkit::Tensor;
using nerkit::Token;

// ---- finite-difference gradient oracle ----
//
// eval(true) must rebuild the computation from the CURRENT parameter values,
// run backward, accumulate into the store's gradients and return the loss;
// eval(false) returns just the forward value. Central differences at h.
struct FdReport {
  double max_rel = 0.0;
  std::size_t coords = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

inline FdReport fd_check(ParameterStore& params,
                         const std::function<double(bool)>& eval,
                         double h = 1e-5) {
  params.zero_grads();
  eval(true);
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params.all()) analytic.push_back(p->grad.values);

  FdReport rep;
  std::size_t pi = 0;
  for (const auto& p : params.all()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double orig = p->value.values[i];
      p->value.values[i] = orig + h;
      double fp = eval(false);
      p->value.values[i] = orig - h;
      double fm = eval(false);
      p->value.values[i] = orig;
      double fd = (fp - fm) / (2.0 * h);
      double a = analytic[pi][i];
      double diff = std::abs(a - fd);
      // below the FD noise floor both are numerically zero
      double rel = diff <= 1e-8 ? 0.0 : diff / std::max(std::abs(a), std::abs(fd));
      ++rep.coords;
      if (rel > rep.max_rel) {
        rep.max_rel = rel;
        rep.worst_param = p->name;
        rep.worst_index = i;
      }
    }
    ++pi;
  }
  params.zero_grads();
  return rep;
}

inline Tensor random_tensor(std::vector<int> shape, Rng& rng,
                            double bound = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values) v = rng.uniform(-bound, bound);
  return t;
}

// ---- independent CRF enumeration oracle ----
//
// Walks all k^n tag sequences with plain double arithmetic, accumulating
// each score left to right exactly like a path sum. Fully independent of
// the tape DP it checks.
struct CrfBruteForce {
  double log_partition = 0.0;
  double max_score = 0.0;
  std::vector<int> argmax;
};

inline CrfBruteForce crf_brute_force(const Tensor& P, const Tensor& A) {
  int n = P.rows(), k = P.cols();
  int start = k, end = k + 1;
  std::vector<int> y(static_cast<std::size_t>(n), 0);
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(std::pow(k, n)));
  CrfBruteForce out;
  bool first = true;
  while (true) {
    double s = A.at(start, y[0]) + P.at(0, y[0]);
    for (int i = 1; i < n; ++i) {
      s = s + A.at(y[static_cast<std::size_t>(i - 1)], y[static_cast<std::size_t>(i)]);
      s = s + P.at(i, y[static_cast<std::size_t>(i)]);
    }
    s = s + A.at(y[static_cast<std::size_t>(n - 1)], end);
    scores.push_back(s);
    if (first || s > out.max_score) {
      out.max_score = s;
      out.argmax = y;
      first = false;
    }
    int pos = n - 1;
    while (pos >= 0 && ++y[static_cast<std::size_t>(pos)] == k) {
      y[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - mx);
  out.log_partition = mx + std::log(acc);
  return out;
}

// ---- synthetic NER corpus ----
//
// Small pools of distinctive entity words inside templated sentences, plus a
// few hundred filler types, so both models can overfit the training draw and
// generalize to a held-out draw from the same generator.
class SynthGen {
 public:
  explicit SynthGen(std::uint64_t seed) : rng_(seed) { build_pools(); }

  std::vector<Sentence> sentences(int count) {
    std::vector<Sentence> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(sentence());
    return out;
  }

  // distinct surface forms a corpus of this generator can produce
  std::size_t vocab_size() const { return vocab_size_; }

 private:
  struct Piece {
    std::vector<std::string> words;
    std::string label;  // empty = O
  };

  void build_pools() {
    first_ = {"Mark", "Anna", "John", "Lena", "Omar",
              "Nina", "Paul", "Sara", "Ivan", "Ruth"};
    last_ = {"Watney", "Stone",  "Rivera", "Okafor", "Larsen",
             "Dubois", "Tanaka", "Novak",  "Silva",  "Moreau"};
    loc_ = {"Mars",  "Paris", "Oslo", "Cairo", "Lima",  "Quito",
            "Kyoto", "Dakar", "Reno", "Bonn",  "Turin", "Perth"};
    org_base_ = {"Acme",  "Globex",   "Initech",   "Umbrella",
                 "Hooli", "Vandelay", "Cyberdyne", "Tyrell"};
    org_suffix_ = {"Corp", "Labs", "Group"};
    const char* pre[] = {"ba", "de", "fi", "go", "hu", "ka", "lo",
                         "mi", "no", "pa", "re", "si", "ta", "vu",
                         "wo", "za", "ce", "du", "he", "ji"};
    const char* suf[] = {"rim", "tok", "lan", "ver", "mus", "nel",
                         "dor", "pit", "gal", "zen", "bor"};
    for (const char* p : pre)
      for (const char* s : suf) filler_.push_back(std::string(p) + s);
    vocab_size_ = first_.size() + last_.size() + loc_.size() +
                  org_base_.size() + org_suffix_.size() + filler_.size() +
                  20 /* fixed template words */;
  }

  const std::string& pick(const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(rng_.below(pool.size()))];
  }

  Piece per() { return {{pick(first_), pick(last_)}, "PER"}; }
  Piece loc() { return {{pick(loc_)}, "LOC"}; }
  Piece org() { return {{pick(org_base_), pick(org_suffix_)}, "ORG"}; }
  Piece word(const std::string& w) { return {{w}, ""}; }
  Piece filler() { return word(pick(filler_)); }
  Piece year() {
    return word(std::to_string(1990 + rng_.below(30)));
  }

  Sentence assemble(const std::vector<Piece>& pieces) {
    Sentence s;
    std::vector<LabeledChunk> chunks;
    for (const Piece& p : pieces) {
      int start = static_cast<int>(s.tokens.size());
      for (const std::string& w : p.words) {
        Token t;
        t.surface = w;
        t.normalized = nerkit::normalize_digits(w);
        s.tokens.push_back(std::move(t));
      }
      if (!p.label.empty())
        chunks.push_back({start, static_cast<int>(s.tokens.size()) - 1,
                          p.label});
    }
    std::vector<std::string> tags = nerkit::chunks_to_tags(
        chunks, s.tokens.size(), nerkit::TagScheme::IOBES);
    for (std::size_t i = 0; i < tags.size(); ++i)
      s.tokens[i].gold_tag = tags[i];
    return s;
  }

  Sentence sentence() {
    switch (rng_.below(10)) {
      case 0:
        return assemble({per(), word("visited"), loc(), word(".")});
      case 1:
        return assemble({per(), word("met"), per(), word("in"), loc(),
                         word(".")});
      case 2:
        return assemble({org(), word("hired"), per(), word(".")});
      case 3:
        return assemble({per(), word("joined"), org(), word("in"), loc(),
                         word(".")});
      case 4:
        return assemble({org(), word("opened"), word("offices"), word("in"),
                         loc(), word(".")});
      case 5:
        return assemble({word("the"), filler(), filler(), word("was"),
                         filler(), word(".")});
      case 6:
        return assemble({per(), word("wrote"), word("about"), filler(),
                         word("in"), loc(), word(".")});
      case 7:
        return assemble({word("in"), year(), per(), word("visited"), loc(),
                         word(".")});
      case 8:
        return assemble({org(), word("and"), org(), word("signed"), word("a"),
                         filler(), word("in"), loc(), word(".")});
      default:
        return assemble({per(), word("left"), org(), word("after"), filler(),
                         word(".")});
    }
  }

  Rng rng_;
  std::vector<std::string> first_, last_, loc_, org_base_, org_suffix_,
      filler_;
  std::size_t vocab_size_ = 0;
};

inline std::vector<std::vector<LabeledChunk>> gold_chunks_of(
    const std::vector<Sentence>& sentences) {
  std::vector<std::vector<LabeledChunk>> out;
  for (const Sentence& s : sentences) {
    std::vector<std::string> tags;
    for (const Token& t : s.tokens) tags.push_back(*t.gold_tag);
    out.push_back(nerkit::tags_to_chunks(tags, nerkit::TagScheme::IOBES));
  }
  return out;
}

}  // namespace testutil
