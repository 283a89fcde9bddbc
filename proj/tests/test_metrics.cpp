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

#include <chrono>
#include <random>

#include "doctest.h"
#include "ngeval/errors.hpp"
#include "ngeval/metrics.hpp"
#include "oracles.hpp"

using namespace ngeval;

namespace {

std::vector<NormalizedText> texts(std::initializer_list<const char*> utf8) {
  std::vector<NormalizedText> out;
  for (const char* s : utf8) out.push_back(oracle::text(s));
  return out;
}

NormalizedText repeat(const std::u32string& unit, std::size_t length) {
  std::u32string s;
  while (s.size() < length) s.push_back(unit[s.size() % unit.size()]);
  return NormalizedText::FromNormalized(std::move(s));
}

RuleSet term_rules(std::initializer_list<const char32_t*> terms) {
  RuleSet rules{"q", {}};
  for (const char32_t* t : terms) rules.clauses.push_back({1.0, RuleExpr::Term(t)});
  return rules;
}

}  // namespace

TEST_CASE("discount") {
  CHECK(discount(0) == 1.0);
  CHECK(discount(100) == 1.0);
  CHECK(discount(125) == 0.5);
  CHECK(discount(150) == 0.0);
  CHECK(discount(400) == 0.0);
  for (std::size_t l = 0; l <= 300; ++l) REQUIRE(discount(l) == oracle::discount(l));
}

TEST_CASE("truncation lengths") {
  CHECK(truncation_lengths(0) == std::vector<std::size_t>{0});
  CHECK(truncation_lengths(100) == std::vector<std::size_t>{100});
  CHECK(truncation_lengths(102) == std::vector<std::size_t>{100, 101, 102});
}

TEST_CASE("fluency_raw hand-enumerated") {
  const auto answers = texts({"abc", "abd"});
  const auto table = NGramTable::Build(answers);
  const auto f = fluency_raw(oracle::text("abc"), table);
  CHECK(f.per_width[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(f.per_width[1] == doctest::Approx(0.75).epsilon(1e-15));

  // Empty response still has <s></s> grams.
  const auto e = fluency_raw(oracle::text(""), table);
  CHECK(e.per_width[0] == doctest::Approx(0.4));
  CHECK(discounted_fluency(oracle::text(""), table) == 0.0);
}

TEST_CASE("fluency_raw matches substring recount") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<NormalizedText> answers;
    for (int i = 0; i < 6; ++i) answers.push_back(oracle::random_text(rng, 5 + rng() % 30, U"abc、。"));
    const auto table = NGramTable::Build(answers);
    const oracle::BruteTable brute(answers);
    for (int r = 0; r < 10; ++r) {
      const auto response = oracle::random_text(rng, rng() % 40, U"abcd。");
      REQUIRE(fluency_raw(response, table).sum ==
              doctest::Approx(oracle::fluency_raw_sum(response, brute)).epsilon(1e-12));
    }
  }
}

TEST_CASE("calibration") {
  const auto one = texts({"超伝導とは電気抵抗がゼロになる現象"});
  const auto rs1 = build_reference_set("q", one);
  CHECK(*rs1.fluency_normalizer == discounted_fluency(one[0], rs1.table));
  CHECK(fluency(one[0], rs1) == 1.0);

  const auto twice = texts({"超伝導とは電気抵抗がゼロになる現象", "超伝導とは電気抵抗がゼロになる現象"});
  const auto rs2 = build_reference_set("q", twice);
  CHECK(*rs2.fluency_normalizer == doctest::Approx(*rs1.fluency_normalizer).epsilon(1e-14));

  const auto toy = texts({"abc", "abd"});
  const auto rs3 = build_reference_set("q", toy);
  const oracle::BruteTable brute(toy);
  const double expected =
      (oracle::fluency_raw_sum(toy[0], brute) + oracle::fluency_raw_sum(toy[1], brute)) / 2.0;
  CHECK(*rs3.fluency_normalizer == doctest::Approx(expected).epsilon(1e-14));

  CHECK_THROWS_AS(calibrate_fluency({}, rs3.table), Error);
  const auto empties = texts({"", ""});
  CHECK_THROWS_AS(build_reference_set("q", empties), Error);
}

TEST_CASE("leave-one-out calibration equals scoring against the other answers") {
  std::mt19937_64 rng(32);
  std::vector<NormalizedText> answers;
  for (int i = 0; i < 8; ++i) answers.push_back(oracle::random_text(rng, 10 + rng() % 20, U"abcd"));
  const auto table = NGramTable::Build(answers);
  double expected = 0.0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    std::vector<NormalizedText> others = answers;
    others.erase(others.begin() + static_cast<long>(i));
    expected += oracle::discount(answers[i].size()) *
                oracle::fluency_raw_sum(answers[i], oracle::BruteTable(others));
  }
  expected /= static_cast<double>(answers.size());
  CHECK(calibrate_fluency(answers, table, FluencyConvention::kLeaveOneOut) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fluency") {
  const auto answers = texts({"abc", "abd", "abcabc"});
  const auto rs = build_reference_set("q", answers);
  CHECK(fluency(repeat(U"abc", 150), rs) == 0.0);
  CHECK(fluency(repeat(U"abc", 151), rs) == 0.0);

  ReferenceSet bare{"q", answers, rs.table, std::nullopt};
  CHECK_THROWS_AS(fluency(answers[0], bare), StateError);

  // Fixed point: the reference answers average to one.
  double mean = 0.0;
  for (const auto& a : answers) mean += fluency(a, rs);
  CHECK(mean / 3.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("doubling the table changes no score") {
  std::mt19937_64 rng(33);
  std::vector<NormalizedText> answers;
  for (int i = 0; i < 10; ++i) answers.push_back(oracle::random_text(rng, 20 + rng() % 100, U"abcde。"));
  std::vector<NormalizedText> doubled = answers;
  doubled.insert(doubled.end(), answers.begin(), answers.end());
  const auto rs = build_reference_set("q", answers);
  const auto rs2 = build_reference_set("q", doubled);
  for (int r = 0; r < 50; ++r) {
    const auto response = oracle::random_text(rng, rng() % 140, U"abcdef。");
    REQUIRE(fluency(response, rs2) == doctest::Approx(fluency(response, rs)).epsilon(1e-12));
    REQUIRE(truthfulness(response, rs2.table) == truthfulness(response, rs.table));
  }
}

TEST_CASE("peak at the target length") {
  for (const std::u32string& unit : {std::u32string(U"a"), std::u32string(U"abc")}) {
    std::vector<NormalizedText> corpus;
    for (std::size_t k = 1; k <= 160; ++k) corpus.push_back(repeat(unit, k));
    const auto table = NGramTable::Build(corpus);
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t l = 50; l <= 150; ++l) {
      const double v = discounted_fluency(repeat(unit, l), table);
      if (v > best_value) {
        best_value = v;
        best = l;
      }
    }
    CHECK(best == 100);
  }
}

TEST_CASE("truthfulness examples") {
  const NormalizedText correct = oracle::text(
      "超伝導とは、ある種の金属や化合物を極低温に冷却したとき、電気抵抗が急激にゼロになる現象である。"
      "また、完全反磁性を示し、磁場を内部から排除するマイスナー効果が観測される。これは量子力学的な"
      "巨視的現象として理解されている。")
      .prefix(100);
  REQUIRE(correct.size() == 100);
  std::vector<NormalizedText> copies(1000, correct);
  const auto table = NGramTable::Build(copies);
  CHECK(truthfulness(correct, table) == 1.0);
  // A cut-off answer ends on a window that was never followed by </s>.
  CHECK(truthfulness(correct.prefix(60), table) ==
        oracle::truthfulness(correct.prefix(60), oracle::BruteTable(copies)));

  CHECK(truthfulness(oracle::text("xyzxyzxyz"), table) == 0.0);
  CHECK(truthfulness(oracle::text(""), table) == 0.0);
  CHECK(truthfulness(oracle::text("、。"), table) == 0.0);

  const NormalizedText garbage =
      NormalizedText::FromNormalized(correct.chars() + U"qwertyuiop");
  REQUIRE(garbage.size() == 110);
  const oracle::BruteTable brute(copies);
  CHECK(truthfulness(garbage, table) == oracle::truthfulness_at(garbage, 100, brute, 0.005));
  CHECK(truthfulness(garbage, table) == 1.0);

  CHECK_THROWS_AS(truthfulness(correct, table, 0.0), ArgumentError);
  CHECK_THROWS_AS(truthfulness(correct, table, 1.5), ArgumentError);
}

TEST_CASE("truthfulness and helpfulness equal the truncation oracle") {
  std::mt19937_64 rng(34);
  std::vector<NormalizedText> answers;
  for (int i = 0; i < 40; ++i) answers.push_back(oracle::random_text(rng, 60 + rng() % 60, U"abcd、"));
  const auto table = NGramTable::Build(answers);
  const oracle::BruteTable brute(answers);
  const auto rules = parse_rules(
      "\"abc\"\n2\tANY(\"dd\", \"ca\")\nALL(\"ab\", NOT(\"bbbb\"))\n0.5\t\"d、a\"\n", "q");
  for (int r = 0; r < 150; ++r) {
    const auto response = oracle::random_text(rng, rng() % 131, U"abcde、");
    REQUIRE(truthfulness(response, table) == oracle::truthfulness(response, brute));
    REQUIRE(truthfulness(response, table, 0.1) == oracle::truthfulness(response, brute, 0.1));
    REQUIRE(helpfulness(response, rules[0]) == oracle::helpfulness(response, rules[0]));
  }
}

TEST_CASE("truthfulness monotonicity") {
  std::mt19937_64 rng(35);
  std::vector<NormalizedText> answers;
  for (int i = 0; i < 30; ++i) answers.push_back(oracle::random_text(rng, 80 + rng() % 40, U"abcd"));
  const auto table = NGramTable::Build(answers);
  for (int r = 0; r < 100; ++r) {
    const auto response = oracle::random_text(rng, rng() % 140, U"abcde。");
    double previous = 2.0;
    for (double threshold : {0.001, 0.005, 0.05, 0.3, 1.0}) {
      const double t = truthfulness(response, table, threshold);
      REQUIRE(t <= previous);
      previous = t;
    }
    if (response.size() >= 100) {
      const auto longer = NormalizedText::FromNormalized(
          response.chars() + oracle::random_text(rng, 1 + rng() % 30, U"abcxyz").chars());
      REQUIRE(truthfulness(longer, table) >= truthfulness(response, table));
    }
  }
}

TEST_CASE("helpfulness examples") {
  const auto rules = term_rules({U"temperature", U"resistance", U"zero", U"magnetic"});
  CHECK(helpfulness(oracle::text("below a critical temperature the resistance drops to zero"), rules) ==
        0.75);
  std::string full = "temperature resistance zero magnetic ";
  full.resize(100, '.');
  CHECK(helpfulness(oracle::text(full.c_str()), rules) == 1.0);

  std::string late = "temperature resistance zero ";
  late.resize(112, '.');
  late += "magnetic";
  REQUIRE(late.size() == 120);
  CHECK(helpfulness(oracle::text(late.c_str()), rules) == 0.75);
  CHECK(helpfulness(oracle::text(""), rules) == 0.0);
  CHECK_THROWS_AS(helpfulness(oracle::text("x"), RuleSet{"q", {}}), ConfigError);
}

TEST_CASE("score_response") {
  CHECK(MetricTriple::Of(0.9, 0.6, 0.3).final_score == doctest::Approx(0.6).epsilon(1e-15));
  const auto answers = texts({"abc", "abd"});
  const auto rs = build_reference_set("q", answers);
  const auto rules = term_rules({U"ab"});
  const auto a = score_response(answers[0], rs, rules);
  const auto b = score_response(answers[0], rs, rules);
  CHECK(a == b);
  CHECK(a.final_score == (a.fluency + a.truthfulness + a.helpfulness) / 3.0);
  CHECK(a.helpfulness == 1.0);
}

TEST_CASE("aggregate") {
  using Entry = std::pair<std::string, MetricTriple>;
  const auto t = MetricTriple::Of(0.9, 0.6, 0.3);
  const std::vector<Entry> single{{"q", t}};
  CHECK(aggregate(single).overall == t);

  const std::vector<Entry> two{{"q1", MetricTriple::Of(0.4, 0.4, 0.4)},
                               {"q2", MetricTriple::Of(0.8, 0.8, 0.8)}};
  CHECK(aggregate(two).overall.final_score == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(aggregate(std::span<const Entry>{}), Error);

  const std::map<std::string, std::string> subjects{{"q1", "physics"}, {"q2", "physics"}};
  const auto with_subjects = aggregate(two, &subjects);
  REQUIRE(with_subjects.subjects.count("physics") == 1);
  CHECK(with_subjects.subjects.at("physics").questions == 2);

  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  std::vector<Entry> many;
  for (int i = 0; i < 200; ++i) {
    many.push_back({"q" + std::to_string(rng() % 7), MetricTriple::Of(u(rng), u(rng), u(rng))});
  }
  const auto base = aggregate(many);
  for (int p = 0; p < 5; ++p) {
    std::shuffle(many.begin(), many.end(), rng);
    const auto again = aggregate(many);
    REQUIRE(again.overall == base.overall);
    REQUIRE(again.responses == 200);
  }
}

TEST_CASE("scoring throughput") {
  std::mt19937_64 rng(37);
  std::vector<NormalizedText> answers;
  for (int i = 0; i < 1000; ++i) answers.push_back(oracle::random_text(rng, 80 + rng() % 40, U"abcdefghij、。"));
  const auto rs = build_reference_set("q", answers);
  const auto rules = parse_rules("\"abc\"\nANY(\"de\", \"fg\")\n", "q");
  const auto start = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (int r = 0; r < 5000; ++r) {
    sink += score_response(oracle::random_text(rng, 80 + rng() % 50, U"abcdefghij、。"), rs, rules[0])
                .final_score;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("5000 responses scored in " << seconds << " s");
  CHECK(sink > 0.0);
  CHECK(seconds < 30.0);
}
