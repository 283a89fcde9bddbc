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

#include <filesystem>
#include <random>

#include "doctest.h"
#include "ngeval/errors.hpp"
#include "ngeval/text.hpp"
#include "oracles.hpp"

using namespace ngeval;

TEST_CASE("utf8 decoding counts code points") {
  CHECK(decode_utf8("abc").size() == 3);
  CHECK(decode_utf8("超伝導").size() == 3);
  CHECK(encode_utf8(decode_utf8("超伝導とは")) == "超伝導とは");
  CHECK_THROWS_AS(decode_utf8("\xff"), Error);
  CHECK_THROWS_AS(decode_utf8("\xe3\x81"), Error);        // truncated
  CHECK_THROWS_AS(decode_utf8("\xc0\xaf"), Error);        // overlong
  CHECK_THROWS_AS(decode_utf8("\xed\xa0\x80"), Error);    // surrogate
}

TEST_CASE("normalize_text with an empty table is the identity") {
  const NormalizationRuleTable empty;
  const NormalizedText t = normalize_text(std::string_view("abc"), empty);
  CHECK(t.size() == 3);
  CHECK(t.utf8() == "abc");
  CHECK(t.classes().size() == 3);
}

TEST_CASE("rules apply once each in order") {
  NormalizationRuleTable table;
  table.add_rule({"  ", " "});
  CHECK(normalize_text(std::string_view("a  b"), table).utf8() == "a b");
  // Single pass: three spaces become two, not one.
  CHECK(normalize_text(std::string_view("a   b"), table).utf8() == "a  b");

  NormalizationRuleTable chained;
  chained.add_rule({"x", "y"});
  chained.add_rule({"y", "z"});
  CHECK(normalize_text(std::string_view("x"), chained).utf8() == "z");
}

TEST_CASE("default table unifies width and whitespace") {
  const auto table = NormalizationRuleTable::Default();
  CHECK(normalize_text(std::string_view("　２２回　です\n\n"), table).utf8() == "22回 です");
  CHECK(normalize_text(std::string_view("（注）"), table).utf8() == "(注)");
  CHECK(normalize_text(std::string_view(""), table).empty());
}

TEST_CASE("default normalization is idempotent") {
  const auto table = NormalizationRuleTable::Default();
  std::mt19937_64 rng(7);
  const std::u32string alphabet = U"ab 　\t\n。、「」ＡＢ１２（）超伝導";
  for (int trial = 0; trial < 300; ++trial) {
    const auto raw = oracle::random_text(rng, rng() % 40, alphabet);
    const NormalizedText once = normalize_text(std::u32string_view(raw.chars()), table);
    const NormalizedText twice = normalize_text(std::u32string_view(once.chars()), table);
    REQUIRE(once == twice);
    CHECK(once.classes().size() == once.size());
  }
}

TEST_CASE("bad normalization pattern names the rule") {
  const std::string doc = "# rules\n  \t \nab\tc\n[\tx\n";
  try {
    NormalizationRuleTable::Parse(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("rule 2") != std::string::npos);
  }
  CHECK_THROWS_AS(NormalizationRuleTable::Parse("no tab here\n"), ConfigError);
  CHECK_THROWS_AS(NormalizationRuleTable::Parse("!trim maybe\n"), ConfigError);
}

TEST_CASE("rule table file format") {
  const auto table = NormalizationRuleTable::Parse(
      "# comment\n!unify_width on\n!trim off\nです。\tだ。\n");
  CHECK(table.unify_width);
  CHECK_FALSE(table.trim_whitespace);
  REQUIRE(table.rules().size() == 1);
  CHECK(normalize_text(std::string_view("１です。"), table).utf8() == "1だ。");
  CHECK(table.digest() != NormalizationRuleTable::Default().digest());
}

TEST_CASE("classify_char") {
  CHECK(classify_char(U'。') == CharClass::kPunctuation);
  CHECK(classify_char(U'a') == CharClass::kContent);
  CHECK(classify_char(U'(') == CharClass::kPunctuation);
  CHECK(classify_char(U'「') == CharClass::kPunctuation);
  CHECK(classify_char(U'・') == CharClass::kPunctuation);
  CHECK(classify_char(U'、') == CharClass::kPunctuation);
  CHECK(classify_char(U'々') == CharClass::kContent);
  CHECK(classify_char(U'ー') == CharClass::kContent);
  CHECK(classify_char(U'超') == CharClass::kContent);
  CHECK(classify_char(U'2') == CharClass::kContent);
}

TEST_CASE("punctuation set file") {
  const auto set = PunctuationSet::Parse("# custom\nx\nU+0030..U+0039\nU+0023\n");
  CHECK(set.contains(U'x'));
  CHECK(set.contains(U'5'));
  CHECK(set.contains(U'#'));
  CHECK_FALSE(set.contains(U'。'));
  CHECK(classify_char(U'7', set) == CharClass::kPunctuation);
  CHECK(set.digest() != PunctuationSet::Default().digest());
  CHECK_THROWS_AS(PunctuationSet::Parse("U+zz\n"), ParseError);
  CHECK_THROWS_AS(PunctuationSet::Parse("ab\n"), ParseError);
}

TEST_CASE("extract_grams") {
  const auto ab = oracle::text("ab");
  const auto bigrams = extract_grams(ab, 2);
  REQUIRE(bigrams.size() == 3);
  CHECK(bigrams[0].symbols == std::u32string{kBos, U'a'});
  CHECK(bigrams[1].symbols == U"ab");
  CHECK(bigrams[2].symbols == std::u32string{U'b', kEos});

  const auto empty = extract_grams(oracle::text(""), 1);
  REQUIRE(empty.size() == 2);
  CHECK(empty[0].symbols == std::u32string{kBos});
  CHECK(empty[1].symbols == std::u32string{kEos});

  CHECK(extract_grams(ab, 10).empty());
  CHECK_THROWS_AS(extract_grams(ab, 0), ArgumentError);
  CHECK_THROWS_AS(extract_grams(ab, 11), ArgumentError);
}

TEST_CASE("gram count and overlap properties") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = oracle::random_text(rng, rng() % 30, U"abc。");
    const long L = static_cast<long>(t.size());
    for (int w = 1; w <= kMaxGramWidth; ++w) {
      const auto grams = extract_grams(t, w);
      REQUIRE(static_cast<long>(grams.size()) == std::max(L - w + 3, 0L));
      for (std::size_t i = 0; i < grams.size(); ++i) {
        REQUIRE(grams[i].width() == w);
        // BOS only as the first symbol, EOS only as the last.
        for (int k = 0; k < w; ++k) {
          if (grams[i].symbols[k] == kBos) REQUIRE(k == 0);
          if (grams[i].symbols[k] == kEos) REQUIRE(k == w - 1);
        }
        if (i + 1 < grams.size()) {
          REQUIRE(grams[i].symbols.substr(1) == grams[i + 1].symbols.substr(0, w - 1));
        }
      }
    }
  }
}

TEST_CASE("shipped data files equal the built-in defaults") {
  const std::filesystem::path data = NGEVAL_SOURCE_DIR "/data";
  CHECK(PunctuationSet::FromFile(data / "punctuation.txt").digest() ==
        PunctuationSet::Default().digest());
  CHECK(NormalizationRuleTable::FromFile(data / "normalization.tsv").digest() ==
        NormalizationRuleTable::Default().digest());
}
