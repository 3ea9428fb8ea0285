// Copyright 2026 The uabsa Authors.
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

#ifndef UABSA_CORPUS_H_
#define UABSA_CORPUS_H_

// Annotated-review data types, the word tokenizer, and codecs for the two
// text formats used for training data:
//
//   APC   three-line blocks: sentence with the aspect replaced by "$T$",
//         the aspect term, and its polarity. Blocks are blank-line
//         separated and a sentence is repeated once per aspect.
//
//   ATEPC one "<token> <tag> <slot>" line per token, blank-line separated
//         sentences. Tags are O / B-ASP / I-ASP; the slot holds the
//         polarity for the tokens of the focused aspect and -999 elsewhere.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uabsa/error.h"

namespace uabsa {

enum class Polarity : uint8_t { kPositive = 0, kNegative = 1, kNeutral = 2 };

inline constexpr int kNumPolarities = 3;
inline constexpr Polarity kAllPolarities[] = {
    Polarity::kPositive, Polarity::kNegative, Polarity::kNeutral};

inline std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "Positive";
    case Polarity::kNegative: return "Negative";
    case Polarity::kNeutral: return "Neutral";
  }
  return "?";
}

inline std::optional<Polarity> parse_polarity(std::string_view s) {
  for (Polarity p : kAllPolarities) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

inline std::ostream &operator<<(std::ostream &os, Polarity p) {
  return os << to_string(p);
}

enum class Tag : uint8_t { kO = 0, kB = 1, kI = 2 };

inline constexpr int kNumTags = 3;

inline std::string_view to_string(Tag t) {
  switch (t) {
    case Tag::kO: return "O";
    case Tag::kB: return "B-ASP";
    case Tag::kI: return "I-ASP";
  }
  return "?";
}

inline std::optional<Tag> parse_tag(std::string_view s) {
  if (s == "O") return Tag::kO;
  if (s == "B-ASP") return Tag::kB;
  if (s == "I-ASP") return Tag::kI;
  return std::nullopt;
}

inline std::ostream &operator<<(std::ostream &os, Tag t) {
  return os << to_string(t);
}

// Polarity slot of one ATEPC token. kSentinel is written as "-999".
enum class Slot : uint8_t {
  kPositive = 0,
  kNegative = 1,
  kNeutral = 2,
  kSentinel = 3,
};

inline constexpr std::string_view kSentinelText = "-999";

inline Slot to_slot(Polarity p) { return static_cast<Slot>(p); }

inline std::optional<Polarity> slot_polarity(Slot s) {
  if (s == Slot::kSentinel) return std::nullopt;
  return static_cast<Polarity>(s);
}

inline std::string_view to_string(Slot s) {
  if (s == Slot::kSentinel) return kSentinelText;
  return to_string(static_cast<Polarity>(s));
}

inline std::optional<Slot> parse_slot(std::string_view s) {
  if (s == kSentinelText) return Slot::kSentinel;
  if (auto p = parse_polarity(s)) return to_slot(*p);
  return std::nullopt;
}

// Inclusive token range [start, end].
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool contains(int i) const { return i >= start && i <= end; }
  bool overlaps(const Span &o) const { return start <= o.end && o.start <= end; }
  bool valid_for(int n) const { return 0 <= start && start <= end && end < n; }

  friend auto operator<=>(const Span &, const Span &) = default;
};

inline std::ostream &operator<<(std::ostream &os, const Span &s) {
  return os << "(" << s.start << "," << s.end << ")";
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace internal {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

inline bool is_ascii_punct(unsigned char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '(': case ')': case '\'': case '"':
      return true;
    default:
      return false;
  }
}

// Length of a curly quote (U+2018, U+2019, U+201C, U+201D) starting at pos,
// or 0.
inline size_t curly_quote_len(std::string_view s, size_t pos) {
  if (pos + 2 < s.size() && static_cast<unsigned char>(s[pos]) == 0xE2 &&
      static_cast<unsigned char>(s[pos + 1]) == 0x80) {
    unsigned char c = s[pos + 2];
    if (c == 0x98 || c == 0x99 || c == 0x9C || c == 0x9D) return 3;
  }
  return 0;
}

}  // namespace internal

// Splits on whitespace and detaches punctuation marks as standalone tokens,
// so "a fairy tale. A" becomes {"a", "fairy", "tale", ".", "A"}.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (size_t i = 0; i < text.size();) {
    auto c = static_cast<unsigned char>(text[i]);
    if (internal::is_space(c)) {
      flush();
      ++i;
    } else if (internal::is_ascii_punct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
      ++i;
    } else if (size_t q = internal::curly_quote_len(text, i); q > 0) {
      flush();
      tokens.emplace_back(text.substr(i, q));
      i += q;
    } else {
      current.push_back(static_cast<char>(c));
      ++i;
    }
  }
  flush();
  return tokens;
}

inline std::string join(const std::vector<std::string> &tokens, size_t begin,
                        size_t end, std::string_view sep = " ") {
  std::string out;
  for (size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (i > begin) out += sep;
    out += tokens[i];
  }
  return out;
}

inline std::string join(const std::vector<std::string> &tokens,
                        std::string_view sep = " ") {
  return join(tokens, 0, tokens.size(), sep);
}

// ---------------------------------------------------------------------------
// Records

struct ApcRecord {
  std::vector<std::string> tokens;
  Span aspect;
  Polarity polarity = Polarity::kNeutral;

  std::string aspect_term() const {
    return join(tokens, aspect.start, aspect.end + 1);
  }
  friend bool operator==(const ApcRecord &, const ApcRecord &) = default;
};

struct AtepcSentence {
  std::vector<std::string> tokens;
  std::vector<Tag> tags;
  std::vector<Slot> slots;

  int size() const { return static_cast<int>(tokens.size()); }

  // The tagged span whose slots carry a polarity.
  std::optional<Span> focused_span() const {
    for (int i = 0; i < size(); ++i) {
      if (slots[i] == Slot::kSentinel) continue;
      int j = i;
      while (j + 1 < size() && slots[j + 1] != Slot::kSentinel) ++j;
      return Span{i, j};
    }
    return std::nullopt;
  }

  std::optional<Polarity> focused_polarity() const {
    for (Slot s : slots) {
      if (auto p = slot_polarity(s)) return p;
    }
    return std::nullopt;
  }

  friend bool operator==(const AtepcSentence &, const AtepcSentence &) = default;
};

// Maximal B/I runs of a well-formed tag sequence.
inline std::vector<Span> tag_spans(const std::vector<Tag> &tags) {
  std::vector<Span> spans;
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    if (tags[i] == Tag::kO) continue;
    int j = i;
    while (j + 1 < static_cast<int>(tags.size()) && tags[j + 1] == Tag::kI) ++j;
    spans.push_back({i, j});
    i = j;
  }
  return spans;
}

// Checks the ATEPC sentence invariants. Returns an error message or empty.
inline std::string check_atepc(const AtepcSentence &s) {
  const int n = s.size();
  if (n == 0) return "empty sentence";
  if (static_cast<int>(s.tags.size()) != n ||
      static_cast<int>(s.slots.size()) != n) {
    return "tags/slots length differs from token count";
  }
  for (int i = 0; i < n; ++i) {
    if (s.tokens[i].empty()) return "empty token";
    for (char c : s.tokens[i]) {
      if (internal::is_space(static_cast<unsigned char>(c))) {
        return "token '" + s.tokens[i] + "' contains whitespace";
      }
    }
    if (s.tags[i] == Tag::kI && (i == 0 || s.tags[i - 1] == Tag::kO)) {
      return "I-ASP at token " + std::to_string(i + 1) +
             " does not continue a span";
    }
    if (s.slots[i] != Slot::kSentinel && s.tags[i] == Tag::kO) {
      return "polarity on untagged token '" + s.tokens[i] + "'";
    }
  }
  int focused = 0;
  for (const Span &span : tag_spans(s.tags)) {
    int labelled = 0;
    for (int i = span.start; i <= span.end; ++i) {
      if (s.slots[i] != Slot::kSentinel) {
        ++labelled;
        if (s.slots[i] != s.slots[span.start]) {
          return "mixed polarities inside one aspect span";
        }
      }
    }
    if (labelled == 0) continue;
    if (labelled != span.length()) {
      return "aspect span only partially carries polarity";
    }
    ++focused;
  }
  if (focused != 1) {
    return "expected exactly one focused aspect span, found " +
           std::to_string(focused);
  }
  return {};
}

// ---------------------------------------------------------------------------
// APC codec

namespace internal {

struct Line {
  int number;
  std::string_view text;
};

inline std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  size_t pos = 0;
  int number = 1;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number++, line});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return is_space(static_cast<unsigned char>(c));
  });
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Groups consecutive non-blank lines.
inline std::vector<std::vector<Line>> blocks(std::string_view text) {
  std::vector<std::vector<Line>> out;
  std::vector<Line> cur;
  for (const Line &l : split_lines(text)) {
    if (is_blank(l.text)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(l);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace internal

inline constexpr std::string_view kAspectMarker = "$T$";

inline std::vector<ApcRecord> parse_apc(std::string_view text) {
  std::vector<ApcRecord> records;
  for (const auto &block : internal::blocks(text)) {
    const int first = block.front().number;
    if (block.size() == 1) throw ParseError("blank aspect line", first + 1);
    if (block.size() == 2) throw ParseError("blank polarity line", first + 2);
    if (block.size() > 3) {
      throw ParseError("block has " + std::to_string(block.size()) +
                           " lines, expected sentence/aspect/polarity",
                       block[3].number);
    }
    std::string_view sentence = block[0].text;
    size_t at = sentence.find(kAspectMarker);
    if (at == std::string_view::npos) {
      throw ParseError("missing $T$ marker", block[0].number);
    }
    if (sentence.find(kAspectMarker, at + 1) != std::string_view::npos) {
      throw ParseError("more than one $T$ marker", block[0].number);
    }
    std::string spaced(sentence.substr(0, at));
    spaced += " ";
    spaced += kAspectMarker;
    spaced += " ";
    spaced += sentence.substr(at + kAspectMarker.size());

    std::vector<std::string> aspect = tokenize(block[1].text);
    if (aspect.empty()) throw ParseError("blank aspect line", block[1].number);
    std::string_view pol_text = internal::trim(block[2].text);
    auto polarity = parse_polarity(pol_text);
    if (!polarity) {
      throw ParseError("unknown polarity '" + std::string(pol_text) +
                           "' (expected Positive, Negative or Neutral)",
                       block[2].number);
    }

    ApcRecord rec;
    rec.polarity = *polarity;
    for (std::string &tok : tokenize(spaced)) {
      if (tok == kAspectMarker) {
        rec.aspect.start = static_cast<int>(rec.tokens.size());
        rec.tokens.insert(rec.tokens.end(), aspect.begin(), aspect.end());
        rec.aspect.end = static_cast<int>(rec.tokens.size()) - 1;
      } else {
        rec.tokens.push_back(std::move(tok));
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string serialize_apc(const std::vector<ApcRecord> &records) {
  std::string out;
  for (size_t r = 0; r < records.size(); ++r) {
    const ApcRecord &rec = records[r];
    if (r > 0) out += '\n';
    std::vector<std::string> line;
    line.insert(line.end(), rec.tokens.begin(),
                rec.tokens.begin() + rec.aspect.start);
    line.emplace_back(kAspectMarker);
    line.insert(line.end(), rec.tokens.begin() + rec.aspect.end + 1,
                rec.tokens.end());
    out += join(line);
    out += '\n';
    out += rec.aspect_term();
    out += '\n';
    out += to_string(rec.polarity);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// APC -> ATEPC

// One sentence copy per record. Every aspect of the record's sentence is
// tagged, but only the record's own aspect carries its polarity. Records of
// one sentence must be contiguous.
inline std::vector<AtepcSentence> apc_to_atepc(
    const std::vector<ApcRecord> &records) {
  std::vector<AtepcSentence> out;
  out.reserve(records.size());
  size_t begin = 0;
  while (begin < records.size()) {
    size_t end = begin + 1;
    while (end < records.size() && records[end].tokens == records[begin].tokens)
      ++end;

    const int n = static_cast<int>(records[begin].tokens.size());
    std::vector<Span> spans;
    for (size_t r = begin; r < end; ++r) {
      const Span &s = records[r].aspect;
      if (!s.valid_for(n)) {
        throw ParseError("aspect span out of range in record " +
                         std::to_string(r + 1));
      }
      if (std::find(spans.begin(), spans.end(), s) != spans.end()) continue;
      for (const Span &o : spans) {
        if (o.overlaps(s)) {
          throw ParseError("overlapping aspects in record " +
                           std::to_string(r + 1) + ": '" +
                           records[r].aspect_term() + "'");
        }
      }
      spans.push_back(s);
    }
    std::vector<Tag> tags(n, Tag::kO);
    for (const Span &s : spans) {
      tags[s.start] = Tag::kB;
      for (int i = s.start + 1; i <= s.end; ++i) tags[i] = Tag::kI;
    }
    for (size_t r = begin; r < end; ++r) {
      AtepcSentence sent{records[r].tokens, tags,
                         std::vector<Slot>(n, Slot::kSentinel)};
      for (int i = records[r].aspect.start; i <= records[r].aspect.end; ++i) {
        sent.slots[i] = to_slot(records[r].polarity);
      }
      out.push_back(std::move(sent));
    }
    begin = end;
  }
  return out;
}

// Inverse direction: one APC record per ATEPC sentence copy.
inline std::vector<ApcRecord> atepc_to_apc(
    const std::vector<AtepcSentence> &sentences) {
  std::vector<ApcRecord> out;
  out.reserve(sentences.size());
  for (const AtepcSentence &s : sentences) {
    auto span = s.focused_span();
    auto pol = s.focused_polarity();
    if (!span || !pol) throw ParseError("sentence without a focused aspect");
    out.push_back({s.tokens, *span, *pol});
  }
  return out;
}

// ---------------------------------------------------------------------------
// ATEPC codec

inline std::string serialize_atepc(const std::vector<AtepcSentence> &sentences) {
  std::string out;
  for (size_t k = 0; k < sentences.size(); ++k) {
    const AtepcSentence &s = sentences[k];
    if (k > 0) out += '\n';
    for (int i = 0; i < s.size(); ++i) {
      out += s.tokens[i];
      out += ' ';
      out += to_string(s.tags[i]);
      out += ' ';
      out += to_string(s.slots[i]);
      out += '\n';
    }
  }
  return out;
}

inline std::vector<AtepcSentence> parse_atepc(std::string_view text) {
  std::vector<AtepcSentence> out;
  for (const auto &block : internal::blocks(text)) {
    AtepcSentence s;
    for (const internal::Line &line : block) {
      std::vector<std::string_view> cols;
      std::string_view rest = line.text;
      while (!rest.empty()) {
        size_t sp = rest.find_first_of(" \t");
        cols.push_back(rest.substr(0, sp));
        if (sp == std::string_view::npos) break;
        rest.remove_prefix(sp + 1);
      }
      if (cols.size() != 3 ||
          std::any_of(cols.begin(), cols.end(),
                      [](std::string_view c) { return c.empty(); })) {
        throw ParseError("expected '<token> <tag> <polarity>', got " +
                             std::to_string(cols.size()) + " column(s)",
                         line.number);
      }
      auto tag = parse_tag(cols[1]);
      if (!tag) {
        throw ParseError("unknown tag '" + std::string(cols[1]) + "'",
                         line.number);
      }
      auto slot = parse_slot(cols[2]);
      if (!slot) {
        throw ParseError("unknown polarity slot '" + std::string(cols[2]) + "'",
                         line.number);
      }
      if (*tag == Tag::kI && (s.tags.empty() || s.tags.back() == Tag::kO)) {
        throw ParseError("I-ASP does not continue a span", line.number);
      }
      s.tokens.emplace_back(cols[0]);
      s.tags.push_back(*tag);
      s.slots.push_back(*slot);
    }
    if (std::string err = check_atepc(s); !err.empty()) {
      throw ParseError(err, block.front().number);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace uabsa

#endif  // UABSA_CORPUS_H_
