// Copyright 2026 The ngeval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Text normalization, character classes and sentinel-aware character
// n-gram extraction.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ngeval {

// Sentinel tokens live just past the Unicode code space so they can never
// collide with a decoded character.
inline constexpr char32_t kBos = 0x110000;
inline constexpr char32_t kEos = 0x110001;
inline constexpr int kMaxGramWidth = 10;

// Strict UTF-8 decoding. Throws Error on malformed input, surrogates and
// overlong forms.
std::u32string decode_utf8(std::string_view bytes);
// Sentinels are rendered as "<s>" and "</s>".
std::string encode_utf8(std::u32string_view chars);

enum class CharClass : std::uint8_t { kContent, kPunctuation };

// Set of characters treated as punctuation or symbols. Stored as sorted,
// merged inclusive code-point ranges.
class PunctuationSet {
 public:
  using Range = std::pair<char32_t, char32_t>;

  PunctuationSet() = default;
  explicit PunctuationSet(std::vector<Range> ranges);

  // ASCII punctuation and space, general punctuation, CJK symbols and
  // punctuation (without the iteration/numeral marks), fullwidth and
  // halfwidth forms of the same.
  static const PunctuationSet& Default();

  // One character or one `U+XXXX..U+YYYY` range per line; `#` starts a
  // comment line. A lone `#` character is written as U+0023.
  static PunctuationSet Parse(std::string_view document);
  static PunctuationSet FromFile(const std::filesystem::path& path);

  bool contains(char32_t c) const;
  const std::vector<Range>& ranges() const { return ranges_; }
  std::uint64_t digest() const;

 private:
  std::vector<Range> ranges_;
};

CharClass classify_char(char32_t c,
                        const PunctuationSet& set = PunctuationSet::Default());

struct RewriteRule {
  std::string pattern;      // ECMAScript regex, UTF-8
  std::string replacement;  // regex_replace format string, UTF-8
};

// Ordered rewrite rules applied once each, in order. Width unification runs
// before the rules and whitespace trimming after them.
class NormalizationRuleTable {
 public:
  NormalizationRuleTable() = default;

  // Width unification, whitespace collapse and trimming.
  static NormalizationRuleTable Default();

  // `pattern<TAB>replacement` per line, `#` comments. Directives
  // `!unify_width on|off` and `!trim on|off` set the flags. Throws
  // ConfigError naming the rule index for a bad pattern.
  static NormalizationRuleTable Parse(std::string_view document);
  static NormalizationRuleTable FromFile(const std::filesystem::path& path);

  void add_rule(RewriteRule rule);

  bool unify_width = false;
  bool trim_whitespace = false;

  std::u32string apply(std::u32string_view text) const;
  const std::vector<RewriteRule>& rules() const { return rules_; }
  std::uint64_t digest() const;

 private:
  std::vector<RewriteRule> rules_;
  std::vector<std::wregex> compiled_;
};

// A response after normalization: code points plus a class per code point.
class NormalizedText {
 public:
  NormalizedText() = default;

  // Wraps characters that are already normalized.
  static NormalizedText FromNormalized(
      std::u32string chars,
      const PunctuationSet& set = PunctuationSet::Default());

  const std::u32string& chars() const { return chars_; }
  const std::vector<CharClass>& classes() const { return classes_; }
  std::size_t size() const { return chars_.size(); }
  bool empty() const { return chars_.empty(); }
  // 0-based.
  bool is_content(std::size_t index) const {
    return classes_[index] == CharClass::kContent;
  }
  std::string utf8() const { return encode_utf8(chars_); }

  // First n characters (clamped to size).
  NormalizedText prefix(std::size_t n) const;

  friend bool operator==(const NormalizedText&,
                         const NormalizedText&) = default;

 private:
  std::u32string chars_;
  std::vector<CharClass> classes_;
};

NormalizedText normalize_text(
    std::u32string_view raw, const NormalizationRuleTable& table,
    const PunctuationSet& set = PunctuationSet::Default());
NormalizedText normalize_text(
    std::string_view raw_utf8, const NormalizationRuleTable& table,
    const PunctuationSet& set = PunctuationSet::Default());

// A character w-gram; symbols may start with kBos and end with kEos.
struct Gram {
  std::u32string symbols;

  int width() const { return static_cast<int>(symbols.size()); }
  std::string to_string() const { return encode_utf8(symbols); }

  friend auto operator<=>(const Gram&, const Gram&) = default;
};

struct GramHash {
  std::size_t operator()(const Gram& g) const noexcept {
    return std::hash<std::u32string>{}(g.symbols);
  }
};

// BOS + characters + EOS.
std::u32string with_sentinels(const NormalizedText& text);

// The max(L - w + 3, 0) grams G_0 .. G_{L-w+2} over the sentinel-padded text.
// Throws ArgumentError unless 1 <= width <= kMaxGramWidth.
std::vector<Gram> extract_grams(const NormalizedText& text, int width);

}  // namespace ngeval
