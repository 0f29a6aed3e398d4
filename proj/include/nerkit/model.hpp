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
#include <string>
#include <vector>

#include "nerkit/chunker.hpp"
#include "nerkit/crf.hpp"

namespace nerkit {

inline std::unique_ptr<Model> make_model(const RunConfig& cfg,
                                         Vocabulary vocab, Rng& rng) {
  cfg.validate();
  if (cfg.model == "lstm-crf")
    return std::make_unique<CrfTagger>(cfg, std::move(vocab), rng);
  return std::make_unique<TransitionChunker>(cfg, std::move(vocab), rng);
}

// Tries IOBES, then IOB2, then IOB1; all-O corpora match the first scheme,
// which is conversion-safe.
inline std::optional<TagScheme> detect_scheme(
    const std::vector<Sentence>& sentences) {
  for (TagScheme s :
       {TagScheme::IOBES, TagScheme::IOB2, TagScheme::IOB1}) {
    bool ok = true;
    for (const Sentence& sent : sentences) {
      std::vector<std::string> tags;
      for (const Token& t : sent.tokens) {
        if (!t.gold_tag) {
          ok = false;
          break;
        }
        tags.push_back(*t.gold_tag);
      }
      if (!ok || validate_tags(tags, s) != kValidTags) {
        ok = false;
        break;
      }
    }
    if (ok) return s;
  }
  return std::nullopt;
}

// Parses CoNLL text and converts gold tags into the model scheme. Invalid
// gold sequences are a hard error; silently repairing gold data would
// corrupt evaluation.
inline std::vector<Sentence> prepare_tagged_sentences(const std::string& text,
                                                      const RunConfig& cfg) {
  ConllOptions opts;
  opts.normalize = cfg.digit_norm;
  std::vector<Sentence> sentences = parse_conll(text, opts);
  if (sentences.empty()) return sentences;

  TagScheme from;
  if (cfg.input_scheme == "auto") {
    std::optional<TagScheme> detected = detect_scheme(sentences);
    if (!detected)
      throw std::runtime_error(
          "could not detect a tagging scheme (tags missing or invalid under "
          "iobes, iob2 and iob1)");
    from = *detected;
  } else {
    from = *scheme_from_name(cfg.input_scheme);
  }

  TagScheme to = *scheme_from_name(cfg.scheme);
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    Sentence& s = sentences[si];
    std::vector<std::string> tags;
    for (const Token& t : s.tokens) {
      if (!t.gold_tag)
        throw std::runtime_error("sentence " + std::to_string(si) +
                                 ": token without a gold tag");
      tags.push_back(*t.gold_tag);
    }
    std::size_t bad = validate_tags(tags, from);
    if (bad != kValidTags)
      throw ValidationError(bad, "sentence " + std::to_string(si) +
                                     ": tag sequence invalid under " +
                                     scheme_name(from));
    std::vector<std::string> converted = convert_scheme(tags, from, to);
    for (std::size_t i = 0; i < converted.size(); ++i)
      s.tokens[i].gold_tag = converted[i];
  }
  return sentences;
}

}  // namespace nerkit
