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

#include <memory>
#include <vector>

#include "nerkit/config.hpp"
#include "nerkit/corpus.hpp"
#include "nerkit/tape.hpp"
#include "nerkit/wordrep.hpp"

namespace nerkit {

// One supervised sentence, with gold tags resolved to ids in the model's
// scheme and the equivalent chunk set.
struct Example {
  Sentence sentence;
  std::vector<int> gold_tag_ids;
  std::vector<LabeledChunk> gold_chunks;
};

// Common surface of the two sequence labelers. Training drives example_loss
// through a per-example tape; prediction runs with frozen parameters.
class Model {
 public:
  virtual ~Model() = default;

  virtual const char* model_type() const = 0;
  virtual const RunConfig& config() const = 0;
  virtual const Vocabulary& vocab() const = 0;
  virtual ParameterStore& params() = 0;
  virtual WordRep& wordrep() = 0;
  const ParameterStore& params() const {
    return const_cast<Model*>(this)->params();
  }

  // Train-mode loss (dropout and singleton replacement active).
  virtual Var example_loss(Tape& tape, const Example& ex, Rng& rng) = 0;

  virtual std::vector<std::string> predict_tags(const Sentence& s) const = 0;
  virtual std::vector<LabeledChunk> predict_chunks(const Sentence& s) const = 0;
};

// Gold tags must already be in the model scheme; throws ValidationError on
// ill-formed gold sequences.
inline std::vector<Example> prepare_examples(std::vector<Sentence> sentences,
                                             const Vocabulary& vocab,
                                             TagScheme scheme) {
  std::vector<Example> out;
  out.reserve(sentences.size());
  for (Sentence& s : sentences) {
    Example ex;
    std::vector<std::string> tags;
    for (const Token& t : s.tokens) {
      if (!t.gold_tag)
        throw std::invalid_argument("prepare_examples: token without gold tag");
      tags.push_back(*t.gold_tag);
    }
    ex.gold_chunks = tags_to_chunks(tags, scheme);
    for (const std::string& t : tags) ex.gold_tag_ids.push_back(vocab.tag_id(t));
    ex.sentence = std::move(s);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace nerkit
