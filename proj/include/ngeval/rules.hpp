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

// Per-question rule language shared by helpfulness scoring and the
// candidate drop filters.
//
// A rule document holds one clause per line:
//
//     # superconductivity
//     1	"temperature"
//     1	ANY("zero", "0")
//     2	ALL("magnetic", NOT("electric"))
//
// The weight and its TAB are optional (weight 1). Operators are ALL/AND,
// ANY/OR and NOT; terms are double-quoted literals with \" \\ \n \t escapes.
// A line `[question_id]` starts a section, so several questions can share
// one file; clauses before the first section belong to the file's default
// question id.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ngeval/text.hpp"

namespace ngeval {

struct RuleExpr {
  enum class Kind { kTerm, kAny, kAll, kNot };

  Kind kind = Kind::kTerm;
  std::u32string term;  // kTerm only; already normalized
  std::vector<RuleExpr> children;

  static RuleExpr Term(std::u32string literal);
  static RuleExpr Any(std::vector<RuleExpr> children);
  static RuleExpr All(std::vector<RuleExpr> children);
  static RuleExpr Not(RuleExpr child);

  friend bool operator==(const RuleExpr&, const RuleExpr&) = default;
};

struct WeightedClause {
  double weight = 1.0;
  RuleExpr expr;

  friend bool operator==(const WeightedClause&,
                         const WeightedClause&) = default;
};

struct RuleSet {
  std::string question_id;
  std::vector<WeightedClause> clauses;

  double total_weight() const;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

// Candidates for which `expr` holds are dropped.
struct DropRule {
  std::string question_id;
  RuleExpr expr;

  friend bool operator==(const DropRule&, const DropRule&) = default;
};

// Parses a single expression. Columns in diagnostics are offset by
// `column_offset`. When `normalization` is given, term literals are passed
// through it so they match normalized text.
RuleExpr parse_rule_expr(std::string_view source, int line = 1,
                         int column_offset = 0,
                         const NormalizationRuleTable* normalization = nullptr);

// Parses a rule document into one RuleSet per question, in order of first
// appearance. Throws ParseError on syntax errors and ConfigError on
// non-positive weights or a repeated section.
std::vector<RuleSet> parse_rules(
    std::string_view document, std::string_view default_question_id,
    const NormalizationRuleTable* normalization = nullptr);

// Same grammar; every clause becomes a DropRule and weights are ignored.
std::vector<DropRule> parse_drop_rules(
    std::string_view document, std::string_view default_question_id,
    const NormalizationRuleTable* normalization = nullptr);

std::string print_rule(const RuleExpr& expr);
// A document that parse_rules() reads back into an equal RuleSet.
std::string print_rules(const RuleSet& rules);

bool eval_rule(const RuleExpr& expr, std::u32string_view text);
bool eval_rule(const RuleExpr& expr, const NormalizedText& text);

// Throws ConfigError when the set has no clauses or a non-positive weight.
void validate_rules(const RuleSet& rules);
bool contains_negation(const RuleExpr& expr);
// Throws ConfigError if any clause uses NOT.
void lint_no_negation(const RuleSet& rules);

// Sum of satisfied clause weights over the sum of all weights.
double rule_score(const RuleSet& rules, const NormalizedText& text);

}  // namespace ngeval
