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

#include "ngeval/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ngeval/digest.hpp"
#include "ngeval/errors.hpp"

namespace ngeval {

static_assert(sizeof(wchar_t) == sizeof(char32_t),
              "wide regex over code points needs a 32-bit wchar_t");

namespace {

std::wstring to_wide(std::u32string_view s) {
  return std::wstring(s.begin(), s.end());
}

std::u32string from_wide(std::wstring_view s) {
  return std::u32string(s.begin(), s.end());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits on '\n', dropping a trailing '\r'.
std::vector<std::string_view> split_lines(std::string_view doc) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= doc.size()) {
    std::size_t end = doc.find('\n', start);
    if (end == std::string_view::npos) end = doc.size();
    std::string_view line = doc.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x3000;
}

std::string trim_ascii(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

char32_t parse_code_point(std::string_view token, int line) {
  if (token.size() > 2 && (token[0] == 'U' || token[0] == 'u') &&
      token[1] == '+') {
    unsigned value = 0;
    auto hex = token.substr(2);
    auto [ptr, ec] =
        std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size() ||
        value > 0x10FFFF) {
      throw ParseError("bad code point '" + std::string(token) + "'", line, 1);
    }
    return static_cast<char32_t>(value);
  }
  std::u32string decoded = decode_utf8(token);
  if (decoded.size() != 1) {
    throw ParseError("expected one character, got '" + std::string(token) + "'",
                     line, 1);
  }
  return decoded[0];
}

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    int extra;
    char32_t cp;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      cp = b0 & 0x07;
    } else {
      throw Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + extra >= bytes.size()) {
      throw Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw Error("invalid UTF-8 continuation at offset " +
                    std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw Error("invalid UTF-8 code point at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view chars) {
  std::string out;
  out.reserve(chars.size());
  for (char32_t c : chars) {
    if (c == kBos) {
      out += "<s>";
    } else if (c == kEos) {
      out += "</s>";
    } else if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PunctuationSet

PunctuationSet::PunctuationSet(std::vector<Range> ranges) {
  for (auto& [lo, hi] : ranges) {
    if (lo > hi) std::swap(lo, hi);
  }
  std::sort(ranges.begin(), ranges.end());
  for (const auto& r : ranges) {
    if (!ranges_.empty() && r.first <= ranges_.back().second + 1) {
      ranges_.back().second = std::max(ranges_.back().second, r.second);
    } else {
      ranges_.push_back(r);
    }
  }
}

const PunctuationSet& PunctuationSet::Default() {
  static const PunctuationSet set({
      {0x09, 0x0D},      // ASCII control whitespace
      {0x20, 0x2F},      // space ! " # $ % & ' ( ) * + , - . /
      {0x3A, 0x40},      // : ; < = > ? @
      {0x5B, 0x60},      // [ \ ] ^ _ `
      {0x7B, 0x7E},      // { | } ~
      {0xA0, 0xBF},      // Latin-1 punctuation and signs
      {0xD7, 0xD7},      // ×
      {0xF7, 0xF7},      // ÷
      {0x2010, 0x205E},  // general punctuation: dashes, quotes, ellipsis
      {0x3000, 0x3004},  // ideographic space 、 。 〃 〄
      {0x3008, 0x3020},  // 〈〉《》「」『』【】〒〓〔〕 etc.
      {0x3030, 0x3030},  // 〰
      {0x303D, 0x303F},
      {0x30A0, 0x30A0},  // ゠
      {0x30FB, 0x30FB},  // ・
      {0xFF01, 0xFF0F},  // fullwidth ！ through ／
      {0xFF1A, 0xFF20},
      {0xFF3B, 0xFF40},
      {0xFF5B, 0xFF65},  // fullwidth brackets and halfwidth 。「」、・
  });
  return set;
}

PunctuationSet PunctuationSet::Parse(std::string_view document) {
  std::vector<Range> ranges;
  int line_no = 0;
  for (std::string_view raw : split_lines(document)) {
    ++line_no;
    std::string line = trim_ascii(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto dots = line.find("..");
    if (dots != std::string::npos && dots > 0) {
      char32_t lo = parse_code_point(line.substr(0, dots), line_no);
      char32_t hi = parse_code_point(line.substr(dots + 2), line_no);
      if (lo > hi) throw ParseError("empty range", line_no, 1);
      ranges.emplace_back(lo, hi);
    } else {
      char32_t c = parse_code_point(line, line_no);
      ranges.emplace_back(c, c);
    }
  }
  return PunctuationSet(std::move(ranges));
}

PunctuationSet PunctuationSet::FromFile(const std::filesystem::path& path) {
  return Parse(read_file(path));
}

bool PunctuationSet::contains(char32_t c) const {
  auto it = std::upper_bound(
      ranges_.begin(), ranges_.end(), c,
      [](char32_t v, const Range& r) { return v < r.first; });
  if (it == ranges_.begin()) return false;
  --it;
  return c <= it->second;
}

std::uint64_t PunctuationSet::digest() const {
  Fnv1a h;
  h.update("punctuation-set/1");
  for (const auto& [lo, hi] : ranges_) {
    h.update_u64(lo);
    h.update_u64(hi);
  }
  return h.value();
}

CharClass classify_char(char32_t c, const PunctuationSet& set) {
  return set.contains(c) ? CharClass::kPunctuation : CharClass::kContent;
}

// ---------------------------------------------------------------------------
// NormalizationRuleTable

NormalizationRuleTable NormalizationRuleTable::Default() {
  NormalizationRuleTable table;
  table.unify_width = true;
  table.trim_whitespace = true;
  table.add_rule({"[ \\t\\r\\n\\f\\v]+", " "});
  return table;
}

void NormalizationRuleTable::add_rule(RewriteRule rule) {
  std::wregex re;
  try {
    re = std::wregex(to_wide(decode_utf8(rule.pattern)),
                     std::regex_constants::ECMAScript);
  } catch (const std::regex_error& e) {
    throw ConfigError("normalization rule " + std::to_string(rules_.size()) +
                      ": bad pattern '" + rule.pattern + "': " + e.what());
  } catch (const Error& e) {
    throw ConfigError("normalization rule " + std::to_string(rules_.size()) +
                      ": " + e.what());
  }
  decode_utf8(rule.replacement);
  rules_.push_back(std::move(rule));
  compiled_.push_back(std::move(re));
}

NormalizationRuleTable NormalizationRuleTable::Parse(std::string_view document) {
  NormalizationRuleTable table;
  int line_no = 0;
  for (std::string_view line : split_lines(document)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '!') {
      std::istringstream in{std::string(line.substr(1))};
      std::string key, value;
      in >> key >> value;
      bool on;
      if (value == "on") {
        on = true;
      } else if (value == "off") {
        on = false;
      } else {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": directive value must be on or off");
      }
      if (key == "unify_width") {
        table.unify_width = on;
      } else if (key == "trim") {
        table.trim_whitespace = on;
      } else {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown directive '" + key + "'");
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw ConfigError("normalization rule " +
                        std::to_string(table.rules_.size()) + " (line " +
                        std::to_string(line_no) +
                        "): expected pattern<TAB>replacement");
    }
    table.add_rule({std::string(line.substr(0, tab)),
                    std::string(line.substr(tab + 1))});
  }
  return table;
}

NormalizationRuleTable NormalizationRuleTable::FromFile(
    const std::filesystem::path& path) {
  return Parse(read_file(path));
}

std::u32string NormalizationRuleTable::apply(std::u32string_view text) const {
  std::u32string out(text);
  if (unify_width) {
    for (char32_t& c : out) {
      if (c >= 0xFF01 && c <= 0xFF5E) {
        c -= 0xFEE0;
      } else if (c == 0x3000) {
        c = U' ';
      }
    }
  }
  if (!compiled_.empty()) {
    std::wstring wide = to_wide(out);
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
      wide = std::regex_replace(wide, compiled_[i],
                                to_wide(decode_utf8(rules_[i].replacement)));
    }
    out = from_wide(wide);
  }
  if (trim_whitespace) {
    std::size_t b = 0, e = out.size();
    while (b < e && is_space(out[b])) ++b;
    while (e > b && is_space(out[e - 1])) --e;
    out = out.substr(b, e - b);
  }
  return out;
}

std::uint64_t NormalizationRuleTable::digest() const {
  Fnv1a h;
  h.update("normalization-table/1");
  h.update_u64(unify_width ? 1 : 0);
  h.update_u64(trim_whitespace ? 1 : 0);
  for (const auto& r : rules_) {
    h.update_field(r.pattern);
    h.update_field(r.replacement);
  }
  return h.value();
}

// ---------------------------------------------------------------------------
// NormalizedText

NormalizedText NormalizedText::FromNormalized(std::u32string chars,
                                              const PunctuationSet& set) {
  NormalizedText text;
  text.classes_.reserve(chars.size());
  for (char32_t c : chars) text.classes_.push_back(classify_char(c, set));
  text.chars_ = std::move(chars);
  return text;
}

NormalizedText NormalizedText::prefix(std::size_t n) const {
  NormalizedText out;
  n = std::min(n, chars_.size());
  out.chars_ = chars_.substr(0, n);
  out.classes_.assign(classes_.begin(), classes_.begin() + n);
  return out;
}

NormalizedText normalize_text(std::u32string_view raw,
                              const NormalizationRuleTable& table,
                              const PunctuationSet& set) {
  return NormalizedText::FromNormalized(table.apply(raw), set);
}

NormalizedText normalize_text(std::string_view raw_utf8,
                              const NormalizationRuleTable& table,
                              const PunctuationSet& set) {
  return normalize_text(std::u32string_view(decode_utf8(raw_utf8)), table, set);
}

// ---------------------------------------------------------------------------
// Grams

std::u32string with_sentinels(const NormalizedText& text) {
  std::u32string seq;
  seq.reserve(text.size() + 2);
  seq.push_back(kBos);
  seq += text.chars();
  seq.push_back(kEos);
  return seq;
}

std::vector<Gram> extract_grams(const NormalizedText& text, int width) {
  if (width < 1 || width > kMaxGramWidth) {
    throw ArgumentError("gram width must be in 1.." +
                        std::to_string(kMaxGramWidth) + ", got " +
                        std::to_string(width));
  }
  const std::u32string seq = with_sentinels(text);
  std::vector<Gram> grams;
  const auto w = static_cast<std::size_t>(width);
  if (seq.size() < w) return grams;
  grams.reserve(seq.size() - w + 1);
  for (std::size_t i = 0; i + w <= seq.size(); ++i) {
    grams.push_back(Gram{seq.substr(i, w)});
  }
  return grams;
}

}  // namespace ngeval
