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

#include <random>

#include "doctest.h"
#include "ngeval/errors.hpp"
#include "ngeval/rules.hpp"
#include "oracles.hpp"

using namespace ngeval;
using Kind = RuleExpr::Kind;

TEST_CASE("parse nested expression") {
  const RuleExpr e = parse_rule_expr(R"(ALL(ANY("zero","0"), "resistance"))");
  REQUIRE(e.kind == Kind::kAll);
  REQUIRE(e.children.size() == 2);
  CHECK(e.children[0].kind == Kind::kAny);
  CHECK(e.children[0].children[0].term == U"zero");
  CHECK(e.children[0].children[1].term == U"0");
  CHECK(e.children[1].kind == Kind::kTerm);
  CHECK(e.children[1].term == U"resistance");
  CHECK(parse_rule_expr(R"(AND("a", OR("b")))") ==
        RuleExpr::All({RuleExpr::Term(U"a"), RuleExpr::Any({RuleExpr::Term(U"b")})}));
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_rule_expr("ANY()", 4);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 4);
  }
  CHECK_THROWS_AS(parse_rule_expr(R"(XOR("a"))"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(R"("")"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(R"("abc)"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(R"(ALL("a" "b"))"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(R"(NOT("a", "b"))"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(R"("a") junk)"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(R"("\q")"), ParseError);
  CHECK_THROWS_AS(parse_rule_expr(""), ParseError);
}

TEST_CASE("document weights and sections") {
  const auto sets = parse_rules(
      "# superconductivity\n"
      "1\t\"temperature\"\n"
      "\"resistance\"\n"
      "2.5\tANY(\"zero\", \"0\")\n"
      "[q2]\n"
      "ALL(\"a\", NOT(\"b\"))\n",
      "q1");
  REQUIRE(sets.size() == 2);
  CHECK(sets[0].question_id == "q1");
  REQUIRE(sets[0].clauses.size() == 3);
  CHECK(sets[0].clauses[1].weight == 1.0);
  CHECK(sets[0].clauses[2].weight == 2.5);
  CHECK(sets[1].question_id == "q2");
  CHECK(contains_negation(sets[1].clauses[0].expr));
  CHECK_THROWS_AS(lint_no_negation(sets[1]), ConfigError);
  CHECK_NOTHROW(lint_no_negation(sets[0]));
}

TEST_CASE("invalid weights and duplicate sections") {
  CHECK_THROWS_AS(parse_rules("-1\t\"a\"\n", "q"), ConfigError);
  CHECK_THROWS_AS(parse_rules("0\t\"a\"\n", "q"), ConfigError);
  CHECK_THROWS_AS(parse_rules("abc\t\"a\"\n", "q"), ParseError);
  CHECK_THROWS_AS(parse_rules("[a]\n\"x\"\n[a]\n\"y\"\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_rules("\"x\"\n", ""), ParseError);
  try {
    parse_rules("\"ok\"\n\n1\tALL(\"x\",)\n", "q");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 11);
  }
}

TEST_CASE("terms are normalized when a table is given") {
  const auto table = NormalizationRuleTable::Default();
  const auto sets = parse_rules("\"２２\"\n", "clock", &table);
  CHECK(sets[0].clauses[0].expr.term == U"22");
  CHECK_THROWS_AS(parse_rules("\"　\"\n", "q", &table), ParseError);
}

TEST_CASE("eval_rule") {
  const auto drop = parse_rule_expr(R"(ANY("11", "23"))");
  CHECK_FALSE(eval_rule(drop, oracle::text("長針と短針は1日に22回重なる。")));
  CHECK(eval_rule(drop, oracle::text("23回重なる")));
  CHECK(eval_rule(RuleExpr::Term(U"x"), oracle::text("axb")));
  CHECK_FALSE(eval_rule(RuleExpr::Not(RuleExpr::Term(U"x")), oracle::text("axb")));
  CHECK_FALSE(eval_rule(RuleExpr::Term(U"x"), oracle::text("")));
}

TEST_CASE("rule_score") {
  RuleSet rules{"q", {}};
  for (const char32_t* t : {U"a", U"b", U"c", U"d"}) {
    rules.clauses.push_back({1.0, RuleExpr::Term(t)});
  }
  CHECK(rule_score(rules, oracle::text("abc")) == 0.75);
  CHECK(rule_score(rules, oracle::text("dcba")) == 1.0);

  RuleSet weighted{"q", {{2.0, RuleExpr::Term(U"a")},
                         {1.0, RuleExpr::Term(U"b")},
                         {1.0, RuleExpr::Term(U"c")}}};
  CHECK(rule_score(weighted, oracle::text("a")) == 0.5);

  CHECK_THROWS_AS(rule_score(RuleSet{"q", {}}, oracle::text("a")), ConfigError);
}

namespace {

RuleExpr random_expr(std::mt19937_64& rng, int depth, bool allow_not) {
  const int pick = static_cast<int>(rng() % (depth > 0 ? 4 : 1));
  if (pick == 0 || (pick == 3 && !allow_not)) {
    std::u32string term;
    const std::size_t len = 1 + rng() % 3;
    for (std::size_t i = 0; i < len; ++i) term.push_back(U"ab\"\\超"[rng() % 5]);
    return RuleExpr::Term(term);
  }
  if (pick == 3) return RuleExpr::Not(random_expr(rng, depth - 1, allow_not));
  std::vector<RuleExpr> children;
  const std::size_t n = 1 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) children.push_back(random_expr(rng, depth - 1, allow_not));
  return pick == 1 ? RuleExpr::Any(std::move(children)) : RuleExpr::All(std::move(children));
}

}  // namespace

TEST_CASE("print then parse is stable") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    RuleSet rules{"q" + std::to_string(trial), {}};
    const std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      const double weight = 0.25 * static_cast<double>(1 + rng() % 12);
      rules.clauses.push_back({weight, random_expr(rng, 3, true)});
    }
    const auto parsed = parse_rules(print_rules(rules), "");
    REQUIRE(parsed.size() == 1);
    REQUIRE(parsed[0] == rules);
    REQUIRE(print_rules(parsed[0]) == print_rules(rules));
  }
}

TEST_CASE("negation-free rules are monotone under appending") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const RuleExpr e = random_expr(rng, 3, false);
    const auto base = oracle::random_text(rng, rng() % 12, U"ab\"\\超");
    const auto extra = oracle::random_text(rng, rng() % 6, U"ab\"\\超");
    const auto longer = NormalizedText::FromNormalized(base.chars() + extra.chars());
    if (eval_rule(e, base)) REQUIRE(eval_rule(e, longer));
  }
}

TEST_CASE("rule_score ignores clause order") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    RuleSet rules{"q", {}};
    for (int i = 0; i < 5; ++i) {
      rules.clauses.push_back({static_cast<double>(1 + rng() % 4), random_expr(rng, 2, true)});
    }
    const auto text = oracle::random_text(rng, rng() % 15, U"ab超");
    RuleSet reversed = rules;
    std::reverse(reversed.clauses.begin(), reversed.clauses.end());
    // Integer weights keep both sums exact.
    REQUIRE(rule_score(rules, text) == rule_score(reversed, text));
  }
}

TEST_CASE("drop rule documents") {
  const auto drops = parse_drop_rules("ANY(\"11\", \"23\")\n2\t\"午前\"\n", "clock");
  REQUIRE(drops.size() == 2);
  CHECK(drops[0].question_id == "clock");
  CHECK(drops[1].expr.term == U"午前");
}
