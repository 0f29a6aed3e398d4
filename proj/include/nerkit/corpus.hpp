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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nerkit/common.hpp"

namespace nerkit {

namespace utf8 {

// Decodes the codepoint starting at s[i]; advances i. Bytes that do not form
// valid UTF-8 are passed through one at a time.
inline std::uint32_t next(const std::string& s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  std::uint32_t cp = c;
  if (c >= 0xF0)
    len = 4, cp = c & 0x07u;
  else if (c >= 0xE0)
    len = 3, cp = c & 0x0Fu;
  else if (c >= 0xC0)
    len = 2, cp = c & 0x1Fu;
  if (len > 1) {
    if (i + len > s.size()) {
      ++i;
      return c;
    }
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ++i;
        return c;
      }
      cp = (cp << 6) | (cc & 0x3Fu);
    }
  }
  i += len;
  return cp;
}

inline std::vector<std::uint32_t> codepoints(const std::string& s) {
  std::vector<std::uint32_t> out;
  std::size_t i = 0;
  while (i < s.size()) out.push_back(next(s, i));
  return out;
}

}  // namespace utf8

// First codepoints of the Unicode Nd decimal-digit runs (10 digits each).
inline bool is_decimal_digit(std::uint32_t cp) {
  static const std::uint32_t starts[] = {
      0x0030,  0x0660,  0x06F0,  0x07C0,  0x0966,  0x09E6,  0x0A66,  0x0AE6,
      0x0B66,  0x0BE6,  0x0C66,  0x0CE6,  0x0D66,  0x0DE6,  0x0E50,  0x0ED0,
      0x0F20,  0x1040,  0x1090,  0x17E0,  0x1810,  0x1946,  0x19D0,  0x1A80,
      0x1A90,  0x1B50,  0x1BB0,  0x1C40,  0x1C50,  0xA620,  0xA8D0,  0xA900,
      0xA9D0,  0xA9F0,  0xAA50,  0xABF0,  0xFF10,  0x104A0, 0x11066, 0x110F0,
      0x11136, 0x111D0, 0x112F0, 0x114D0, 0x11650, 0x116C0, 0x11730, 0x118E0,
      0x16A60, 0x16B50, 0x1D7CE, 0x1D7D8, 0x1D7E2, 0x1D7EC, 0x1D7F6};
  for (std::uint32_t s : starts)
    if (cp >= s && cp < s + 10) return true;
  return false;
}

// Replaces every decimal digit with ASCII '0'; all other characters pass
// through untouched. Idempotent.
inline std::string normalize_digits(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    std::uint32_t cp = utf8::next(s, i);
    if (is_decimal_digit(cp))
      out.push_back('0');
    else
      out.append(s, start, i - start);
  }
  return out;
}

struct Token {
  std::string surface;
  std::string normalized;  // differs from surface only on digits
  std::optional<std::string> gold_tag;
};

struct Sentence {
  std::vector<Token> tokens;
  std::size_t size() const { return tokens.size(); }
};

enum class TagScheme { IOB1, IOB2, IOBES };

inline const char* scheme_name(TagScheme s) {
  switch (s) {
    case TagScheme::IOB1:
      return "iob1";
    case TagScheme::IOB2:
      return "iob2";
    case TagScheme::IOBES:
      return "iobes";
  }
  return "?";
}

inline std::optional<TagScheme> scheme_from_name(const std::string& s) {
  if (s == "iob1") return TagScheme::IOB1;
  if (s == "iob2") return TagScheme::IOB2;
  if (s == "iobes") return TagScheme::IOBES;
  return std::nullopt;
}

// Contiguous labeled token span, 0-based inclusive indices.
struct LabeledChunk {
  int start = 0;
  int end = 0;
  std::string label;

  bool operator==(const LabeledChunk& o) const {
    return start == o.start && end == o.end && label == o.label;
  }
  bool operator<(const LabeledChunk& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return label < o.label;
  }
};

namespace detail {

struct TagParts {
  char prefix = 'O';  // 'O', 'B', 'I', 'E', 'S'
  std::string label;  // empty for O
};

inline bool split_tag(const std::string& tag, TagParts& out) {
  if (tag == "O") {
    out = {'O', ""};
    return true;
  }
  if (tag.size() < 3 || tag[1] != '-') return false;
  char p = tag[0];
  if (p != 'B' && p != 'I' && p != 'E' && p != 'S') return false;
  out.prefix = p;
  out.label = tag.substr(2);
  return !out.label.empty();
}

inline bool prefix_in_scheme(char p, TagScheme s) {
  if (p == 'O' || p == 'B' || p == 'I') return true;
  return (p == 'E' || p == 'S') && s == TagScheme::IOBES;
}

}  // namespace detail

constexpr std::size_t kValidTags = static_cast<std::size_t>(-1);

// Returns kValidTags if the sequence is well-formed under the scheme, else
// the first offending index.
inline std::size_t validate_tags(const std::vector<std::string>& tags,
                                 TagScheme scheme) {
  using detail::TagParts;
  TagParts prev{'O', ""};
  bool prev_open = false;  // inside an unfinished chunk (B/I under IOBES)
  for (std::size_t i = 0; i < tags.size(); ++i) {
    TagParts cur;
    if (!detail::split_tag(tags[i], cur) ||
        !detail::prefix_in_scheme(cur.prefix, scheme))
      return i;
    switch (scheme) {
      case TagScheme::IOB1:
        // B only separates two adjacent same-type chunks
        if (cur.prefix == 'B' &&
            !((prev.prefix == 'I' || prev.prefix == 'B') &&
              prev.label == cur.label))
          return i;
        break;
      case TagScheme::IOB2:
        if (cur.prefix == 'I' &&
            !((prev.prefix == 'B' || prev.prefix == 'I') &&
              prev.label == cur.label))
          return i;
        break;
      case TagScheme::IOBES:
        if (cur.prefix == 'I' || cur.prefix == 'E') {
          if (!prev_open || prev.label != cur.label) return i;
        } else {
          // O, B, S may only follow a closed position
          if (prev_open) return i;
        }
        prev_open = cur.prefix == 'B' || cur.prefix == 'I';
        break;
    }
    prev = cur;
  }
  if (scheme == TagScheme::IOBES && prev_open) return tags.size() - 1;
  return kValidTags;
}

// Strict chunk extraction; throws ValidationError on ill-formed input.
inline std::vector<LabeledChunk> tags_to_chunks(
    const std::vector<std::string>& tags, TagScheme scheme) {
  std::size_t bad = validate_tags(tags, scheme);
  if (bad != kValidTags)
    throw ValidationError(bad, "tag sequence invalid under " +
                                   std::string(scheme_name(scheme)) + ": " +
                                   tags[bad]);
  std::vector<LabeledChunk> chunks;
  int open_start = -1;
  std::string open_label;
  auto close = [&](int end) {
    if (open_start >= 0)
      chunks.push_back({open_start, end, open_label});
    open_start = -1;
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    detail::TagParts p;
    detail::split_tag(tags[i], p);
    int t = static_cast<int>(i);
    switch (p.prefix) {
      case 'O':
        close(t - 1);
        break;
      case 'B':
        close(t - 1);
        open_start = t;
        open_label = p.label;
        break;
      case 'I':
        if (scheme == TagScheme::IOB1 &&
            (open_start < 0 || open_label != p.label)) {
          close(t - 1);
          open_start = t;
          open_label = p.label;
        }
        // IOB2/IOBES: validated continuation
        break;
      case 'E':
        close(t);
        break;
      case 'S':
        close(t - 1);
        chunks.push_back({t, t, p.label});
        break;
    }
  }
  close(static_cast<int>(tags.size()) - 1);
  return chunks;
}

// Lenient reader for model output: scheme-invalid I/E are treated as
// chunk-initial, unterminated chunks are closed at the boundary. Never
// throws; malformed tags read as O.
inline std::vector<LabeledChunk> tags_to_chunks_lenient(
    const std::vector<std::string>& tags) {
  std::vector<LabeledChunk> chunks;
  int open_start = -1;
  std::string open_label;
  auto close = [&](int end) {
    if (open_start >= 0) chunks.push_back({open_start, end, open_label});
    open_start = -1;
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    detail::TagParts p;
    if (!detail::split_tag(tags[i], p)) p = {'O', ""};
    int t = static_cast<int>(i);
    bool continues = open_start >= 0 && open_label == p.label;
    switch (p.prefix) {
      case 'O':
        close(t - 1);
        break;
      case 'B':
        close(t - 1);
        open_start = t;
        open_label = p.label;
        break;
      case 'S':
        close(t - 1);
        chunks.push_back({t, t, p.label});
        break;
      case 'I':
        if (!continues) {
          close(t - 1);
          open_start = t;
          open_label = p.label;
        }
        break;
      case 'E':
        if (continues) {
          close(t);
        } else {
          close(t - 1);
          chunks.push_back({t, t, p.label});
        }
        break;
    }
  }
  close(static_cast<int>(tags.size()) - 1);
  return chunks;
}

// Re-emits chunks as tags. Chunks must be sorted, non-overlapping and within
// [0, length).
inline std::vector<std::string> chunks_to_tags(
    const std::vector<LabeledChunk>& chunks, std::size_t length,
    TagScheme scheme) {
  int prev_end = -1;
  std::string prev_label;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const LabeledChunk& ch = chunks[c];
    if (ch.start < 0 || ch.end < ch.start ||
        ch.end >= static_cast<int>(length))
      throw ValidationError(c, "chunk out of range");
    if (ch.start <= prev_end)
      throw ValidationError(c, "chunks overlap or are unsorted");
    prev_end = ch.end;
  }
  std::vector<std::string> tags(length, "O");
  prev_end = -1;
  prev_label.clear();
  for (const LabeledChunk& ch : chunks) {
    switch (scheme) {
      case TagScheme::IOB2:
        tags[static_cast<std::size_t>(ch.start)] = "B-" + ch.label;
        for (int i = ch.start + 1; i <= ch.end; ++i)
          tags[static_cast<std::size_t>(i)] = "I-" + ch.label;
        break;
      case TagScheme::IOB1: {
        bool adjacent_same =
            prev_end == ch.start - 1 && prev_label == ch.label;
        tags[static_cast<std::size_t>(ch.start)] =
            (adjacent_same ? "B-" : "I-") + ch.label;
        for (int i = ch.start + 1; i <= ch.end; ++i)
          tags[static_cast<std::size_t>(i)] = "I-" + ch.label;
        break;
      }
      case TagScheme::IOBES:
        if (ch.start == ch.end) {
          tags[static_cast<std::size_t>(ch.start)] = "S-" + ch.label;
        } else {
          tags[static_cast<std::size_t>(ch.start)] = "B-" + ch.label;
          for (int i = ch.start + 1; i < ch.end; ++i)
            tags[static_cast<std::size_t>(i)] = "I-" + ch.label;
          tags[static_cast<std::size_t>(ch.end)] = "E-" + ch.label;
        }
        break;
    }
    prev_end = ch.end;
    prev_label = ch.label;
  }
  return tags;
}

// Scheme conversion via chunk extraction; preserves the chunk set exactly.
inline std::vector<std::string> convert_scheme(
    const std::vector<std::string>& tags, TagScheme from, TagScheme to) {
  std::vector<LabeledChunk> chunks = tags_to_chunks(tags, from);
  return chunks_to_tags(chunks, tags.size(), to);
}

// ---- CoNLL column format ----

struct ConllOptions {
  int token_column = 0;
  // -1 means the last column when a line has >= 2 columns, no tag otherwise
  int tag_column = -1;
  bool normalize = true;  // digit normalization on the lookup form
};

inline std::vector<Sentence> parse_conll(const std::string& text,
                                         const ConllOptions& opts = {}) {
  std::vector<Sentence> sentences;
  Sentence cur;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto flush = [&]() {
    if (!cur.tokens.empty()) {
      sentences.push_back(std::move(cur));
      cur = Sentence{};
    }
  };
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> cols;
    std::istringstream iss(line);
    std::string col;
    while (iss >> col) cols.push_back(col);

    if (cols.empty()) {
      flush();
      continue;
    }
    if (cols[0] == "-DOCSTART-") continue;  // document marker

    if (opts.token_column >= static_cast<int>(cols.size()))
      throw ParseError(line_no,
                       "expected at least " +
                           std::to_string(opts.token_column + 1) +
                           " columns, got " + std::to_string(cols.size()));
    Token tok;
    tok.surface = cols[static_cast<std::size_t>(opts.token_column)];
    tok.normalized =
        opts.normalize ? normalize_digits(tok.surface) : tok.surface;
    if (opts.tag_column >= 0) {
      if (opts.tag_column >= static_cast<int>(cols.size()))
        throw ParseError(line_no,
                         "expected at least " +
                             std::to_string(opts.tag_column + 1) +
                             " columns, got " + std::to_string(cols.size()));
      tok.gold_tag = cols[static_cast<std::size_t>(opts.tag_column)];
    } else if (cols.size() >= 2) {
      tok.gold_tag = cols.back();
    }
    cur.tokens.push_back(std::move(tok));
  }
  flush();
  return sentences;
}

// Token and tag separated by a single space, blank line between sentences.
inline std::string write_conll(
    const std::vector<Sentence>& sentences,
    const std::vector<std::vector<std::string>>* tags = nullptr) {
  std::string out;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const Sentence& sent = sentences[s];
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      out += sent.tokens[i].surface;
      const std::string* tag = nullptr;
      if (tags) {
        tag = &(*tags)[s][i];
      } else if (sent.tokens[i].gold_tag) {
        tag = &*sent.tokens[i].gold_tag;
      }
      if (tag) {
        out += ' ';
        out += *tag;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

// ---- vocabulary ----

// Dense id maps for words, characters and tags. Id 0 is always the UNK word
// / UNK character; ids follow first occurrence in the training data.
struct Vocabulary {
  static constexpr int kUnkId = 0;
  static constexpr const char* kUnkWord = "<UNK>";

  std::vector<std::string> words;        // id -> word (normalized surface)
  std::vector<std::uint64_t> word_freq;  // aligned with words
  std::vector<std::uint32_t> chars;      // id -> codepoint; [0] = UNK
  std::vector<std::string> tags;         // id -> tag string

  std::unordered_map<std::string, int> word_ids;
  std::unordered_map<std::uint32_t, int> char_ids;
  std::unordered_map<std::string, int> tag_ids;

  int word_count() const { return static_cast<int>(words.size()); }
  int char_count() const { return static_cast<int>(chars.size()); }
  int tag_count() const { return static_cast<int>(tags.size()); }

  int word_id(const std::string& w) const {
    auto it = word_ids.find(w);
    return it == word_ids.end() ? kUnkId : it->second;
  }
  int char_id(std::uint32_t cp) const {
    auto it = char_ids.find(cp);
    return it == char_ids.end() ? kUnkId : it->second;
  }
  int tag_id(const std::string& t) const {
    auto it = tag_ids.find(t);
    if (it == tag_ids.end())
      throw std::out_of_range("unknown tag: " + t);
    return it->second;
  }
  bool has_word(const std::string& w) const { return word_ids.count(w) > 0; }

  bool is_singleton(int word_id_) const {
    return word_freq[static_cast<std::size_t>(word_id_)] == 1;
  }

  // entity labels behind the tags, sorted (REDUCE inventory order)
  std::vector<std::string> entity_labels() const {
    std::set<std::string> labels;
    for (const std::string& t : tags) {
      detail::TagParts p;
      if (detail::split_tag(t, p) && p.prefix != 'O') labels.insert(p.label);
    }
    return std::vector<std::string>(labels.begin(), labels.end());
  }

  void rebuild_maps() {
    word_ids.clear();
    char_ids.clear();
    tag_ids.clear();
    for (std::size_t i = 0; i < words.size(); ++i)
      word_ids[words[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < chars.size(); ++i)
      char_ids[chars[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < tags.size(); ++i)
      tag_ids[tags[i]] = static_cast<int>(i);
  }
};

// Builds word/char/tag vocabularies over normalized surfaces. Words below
// min_word_freq fold into UNK; singletons are words with frequency exactly 1.
inline Vocabulary build_vocab(const std::vector<Sentence>& sentences,
                              std::uint64_t min_word_freq = 1) {
  std::unordered_map<std::string, std::uint64_t> freq;
  std::vector<std::string> word_order;
  std::vector<std::uint32_t> char_order;
  std::unordered_map<std::uint32_t, bool> char_seen;
  std::vector<std::string> tag_order;
  std::unordered_map<std::string, bool> tag_seen;

  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) {
      auto it = freq.find(t.normalized);
      if (it == freq.end()) {
        freq[t.normalized] = 1;
        word_order.push_back(t.normalized);
      } else {
        ++it->second;
      }
      for (std::uint32_t cp : utf8::codepoints(t.normalized)) {
        if (!char_seen[cp]) {
          char_seen[cp] = true;
          char_order.push_back(cp);
        }
      }
      if (t.gold_tag && !tag_seen[*t.gold_tag]) {
        tag_seen[*t.gold_tag] = true;
        tag_order.push_back(*t.gold_tag);
      }
    }
  }

  Vocabulary v;
  v.words.push_back(Vocabulary::kUnkWord);
  v.word_freq.push_back(0);
  for (const std::string& w : word_order) {
    if (freq[w] >= min_word_freq) {
      v.words.push_back(w);
      v.word_freq.push_back(freq[w]);
    }
  }
  v.chars.push_back(0);  // UNK char = codepoint 0 slot
  for (std::uint32_t cp : char_order) v.chars.push_back(cp);
  v.tags = tag_order;
  v.rebuild_maps();
  return v;
}

}  // namespace nerkit
