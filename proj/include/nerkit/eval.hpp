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
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nerkit/corpus.hpp"

namespace nerkit {

// Entity-level scoring in shared-task semantics: a predicted chunk is a true
// positive iff a gold chunk with the same (start, end, label) exists in the
// same sentence, each gold chunk matched at most once.
struct EvalReport {
  struct Counts {
    std::uint64_t tp = 0;
    std::uint64_t pred = 0;
    std::uint64_t gold = 0;
  };

  std::map<std::string, Counts> per_label;
  Counts overall;

  static double precision(const Counts& c) {
    return c.pred == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.pred);
  }
  static double recall(const Counts& c) {
    return c.gold == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.gold);
  }
  static double f1(const Counts& c) {
    double p = precision(c), r = recall(c);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  double overall_f1() const { return f1(overall); }
  double overall_precision() const { return precision(overall); }
  double overall_recall() const { return recall(overall); }

  std::string to_table() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %9s %9s %9s %7s %7s %7s\n", "label",
                  "precision", "recall", "f1", "pred", "gold", "match");
    out += buf;
    auto line = [&](const std::string& name, const Counts& c) {
      std::snprintf(buf, sizeof(buf),
                    "%-12s %9.2f %9.2f %9.2f %7llu %7llu %7llu\n",
                    name.c_str(), precision(c), recall(c), f1(c),
                    static_cast<unsigned long long>(c.pred),
                    static_cast<unsigned long long>(c.gold),
                    static_cast<unsigned long long>(c.tp));
      out += buf;
    };
    for (const auto& [label, c] : per_label) line(label, c);
    line("overall", overall);
    return out;
  }

  std::string to_kv_lines() const {
    std::string out;
    char buf[200];
    auto line = [&](const std::string& name, const Counts& c) {
      std::snprintf(buf, sizeof(buf),
                    "label=%s tp=%llu pred=%llu gold=%llu precision=%.2f "
                    "recall=%.2f f1=%.2f\n",
                    name.c_str(), static_cast<unsigned long long>(c.tp),
                    static_cast<unsigned long long>(c.pred),
                    static_cast<unsigned long long>(c.gold), precision(c),
                    recall(c), f1(c));
      out += buf;
    };
    for (const auto& [label, c] : per_label) line(label, c);
    line("OVERALL", overall);
    return out;
  }
};

inline EvalReport evaluate(const std::vector<std::vector<LabeledChunk>>& pred,
                           const std::vector<std::vector<LabeledChunk>>& gold) {
  if (pred.size() != gold.size())
    throw std::invalid_argument(
        "evaluate: prediction/gold sentence count mismatch");
  EvalReport r;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    // multiset intersection per sentence
    std::map<LabeledChunk, std::uint64_t> gold_left;
    for (const LabeledChunk& g : gold[s]) {
      ++gold_left[g];
      ++r.per_label[g.label].gold;
      ++r.overall.gold;
    }
    for (const LabeledChunk& p : pred[s]) {
      ++r.per_label[p.label].pred;
      ++r.overall.pred;
      auto it = gold_left.find(p);
      if (it != gold_left.end() && it->second > 0) {
        --it->second;
        ++r.per_label[p.label].tp;
        ++r.overall.tp;
      }
    }
  }
  return r;
}

// Gold sequences are validated strictly (ValidationError on the first bad
// index); predictions go through the lenient reader so decoder output that
// strays from the scheme still scores.
inline EvalReport evaluate_tags(
    const std::vector<std::vector<std::string>>& pred_tags,
    const std::vector<std::vector<std::string>>& gold_tags, TagScheme scheme) {
  if (pred_tags.size() != gold_tags.size())
    throw std::invalid_argument(
        "evaluate_tags: prediction/gold sentence count mismatch");
  std::vector<std::vector<LabeledChunk>> pred, gold;
  pred.reserve(pred_tags.size());
  gold.reserve(gold_tags.size());
  for (std::size_t i = 0; i < pred_tags.size(); ++i) {
    gold.push_back(tags_to_chunks(gold_tags[i], scheme));
    pred.push_back(tags_to_chunks_lenient(pred_tags[i]));
  }
  return evaluate(pred, gold);
}

}  // namespace nerkit
