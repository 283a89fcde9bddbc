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

#include "ngeval/rules.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "ngeval/errors.hpp"

namespace ngeval {

RuleExpr RuleExpr::Term(std::u32string literal) {
  RuleExpr e;
  e.kind = Kind::kTerm;
  e.term = std::move(literal);
  return e;
}

RuleExpr RuleExpr::Any(std::vector<RuleExpr> children) {
  RuleExpr e;
  e.kind = Kind::kAny;
  e.children = std::move(children);
  return e;
}

RuleExpr RuleExpr::All(std::vector<RuleExpr> children) {
  RuleExpr e;
  e.kind = Kind::kAll;
  e.children = std::move(children);
  return e;
}

RuleExpr RuleExpr::Not(RuleExpr child) {
  RuleExpr e;
  e.kind = Kind::kNot;
  e.children.push_back(std::move(child));
  return e;
}

double RuleSet::total_weight() const {
  double total = 0.0;
  for (const auto& c : clauses) total += c.weight;
  return total;
}

namespace {

class ExprParser {
 public:
  ExprParser(std::string_view src, int line, int column_offset,
             const NormalizationRuleTable* normalization)
      : src_(src),
        line_(line),
        column_offset_(column_offset),
        normalization_(normalization) {}

  RuleExpr parse() {
    skip_space();
    if (at_end()) fail("empty expression");
    RuleExpr e = parse_expr();
    skip_space();
    if (!at_end()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, column_offset_ + static_cast<int>(pos_) + 1);
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  RuleExpr parse_expr() {
    skip_space();
    if (at_end()) fail("unexpected end of expression");
    if (peek() == '"') return parse_term();

    const std::size_t start = pos_;
    while (!at_end() && ((peek() >= 'A' && peek() <= 'Z') ||
                         (peek() >= 'a' && peek() <= 'z'))) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name.empty()) fail("expected a quoted term or an operator");

    RuleExpr::Kind kind;
    if (name == "ALL" || name == "AND") {
      kind = RuleExpr::Kind::kAll;
    } else if (name == "ANY" || name == "OR") {
      kind = RuleExpr::Kind::kAny;
    } else if (name == "NOT") {
      kind = RuleExpr::Kind::kNot;
    } else {
      pos_ = start;
      fail("unknown operator '" + std::string(name) + "'");
    }

    expect('(');
    const std::size_t open = pos_ - 1;
    std::vector<RuleExpr> children;
    skip_space();
    if (!at_end() && peek() == ')') {
      pos_ = open;
      fail("operator " + std::string(name) + " needs at least one operand");
    }
    while (true) {
      children.push_back(parse_expr());
      skip_space();
      if (at_end()) fail("unterminated operator, expected ')'");
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        ++pos_;
        break;
      }
      fail("expected ',' or ')'");
    }
    if (kind == RuleExpr::Kind::kNot) {
      if (children.size() != 1) {
        pos_ = open;
        fail("NOT takes exactly one operand");
      }
      return RuleExpr::Not(std::move(children.front()));
    }
    return kind == RuleExpr::Kind::kAll ? RuleExpr::All(std::move(children))
                                        : RuleExpr::Any(std::move(children));
  }

  RuleExpr parse_term() {
    const std::size_t open = pos_;
    ++pos_;  // opening quote
    std::string bytes;
    while (true) {
      if (at_end()) {
        pos_ = open;
        fail("unterminated string");
      }
      char c = src_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) fail("dangling escape");
        char esc = src_[pos_++];
        switch (esc) {
          case '"': bytes.push_back('"'); break;
          case '\\': bytes.push_back('\\'); break;
          case 'n': bytes.push_back('\n'); break;
          case 't': bytes.push_back('\t'); break;
          default:
            --pos_;
            fail(std::string("unknown escape '\\") + esc + "'");
        }
        continue;
      }
      bytes.push_back(c);
    }
    std::u32string literal;
    try {
      literal = decode_utf8(bytes);
    } catch (const Error& e) {
      pos_ = open;
      fail(e.what());
    }
    if (normalization_ != nullptr) literal = normalization_->apply(literal);
    if (literal.empty()) {
      pos_ = open;
      fail("empty term");
    }
    return RuleExpr::Term(std::move(literal));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
  int column_offset_;
  const NormalizationRuleTable* normalization_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct ParsedClause {
  std::string question_id;
  WeightedClause clause;
};

std::vector<ParsedClause> parse_document(
    std::string_view document, std::string_view default_question_id,
    const NormalizationRuleTable* normalization,
    std::vector<std::string>* section_order) {
  std::vector<ParsedClause> out;
  std::set<std::string> sections;
  std::string current(default_question_id);
  auto note_section = [&](const std::string& id) {
    for (const auto& s : *section_order) {
      if (s == id) return;
    }
    section_order->push_back(id);
  };
  if (!current.empty()) note_section(current);

  int line_no = 0;
  std::size_t start = 0;
  while (start < document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;

    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) {
        throw ParseError("malformed section header", line_no, 1);
      }
      current = std::string(trim(body.substr(1, body.size() - 2)));
      if (!sections.insert(current).second) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": duplicate question_id '" + current + "'");
      }
      note_section(current);
      continue;
    }
    if (current.empty()) {
      throw ParseError("clause outside any [question_id] section", line_no, 1);
    }

    WeightedClause clause;
    std::string_view expr_text = line;
    int column_offset = 0;
    const auto tab = line.find('\t');
    if (tab != std::string_view::npos &&
        line.substr(0, tab).find('"') == std::string_view::npos &&
        line.substr(0, tab).find('(') == std::string_view::npos) {
      const std::string_view weight_text = trim(line.substr(0, tab));
      double weight = 0.0;
      auto [ptr, ec] = std::from_chars(
          weight_text.data(), weight_text.data() + weight_text.size(), weight);
      if (weight_text.empty() || ec != std::errc() ||
          ptr != weight_text.data() + weight_text.size()) {
        throw ParseError("bad weight '" + std::string(weight_text) + "'",
                         line_no, 1);
      }
      if (!std::isfinite(weight) || weight <= 0.0) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": clause weight must be positive, got " +
                          std::string(weight_text));
      }
      clause.weight = weight;
      expr_text = line.substr(tab + 1);
      column_offset = static_cast<int>(tab + 1);
    }
    clause.expr =
        ExprParser(expr_text, line_no, column_offset, normalization).parse();
    out.push_back({current, std::move(clause)});
  }
  return out;
}

void print_expr(const RuleExpr& e, std::string& out) {
  switch (e.kind) {
    case RuleExpr::Kind::kTerm: {
      out.push_back('"');
      for (char c : encode_utf8(e.term)) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          default: out.push_back(c);
        }
      }
      out.push_back('"');
      return;
    }
    case RuleExpr::Kind::kAny: out += "ANY("; break;
    case RuleExpr::Kind::kAll: out += "ALL("; break;
    case RuleExpr::Kind::kNot: out += "NOT("; break;
  }
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i > 0) out += ", ";
    print_expr(e.children[i], out);
  }
  out.push_back(')');
}

}  // namespace

RuleExpr parse_rule_expr(std::string_view source, int line, int column_offset,
                         const NormalizationRuleTable* normalization) {
  return ExprParser(source, line, column_offset, normalization).parse();
}

std::vector<RuleSet> parse_rules(std::string_view document,
                                 std::string_view default_question_id,
                                 const NormalizationRuleTable* normalization) {
  std::vector<std::string> order;
  auto clauses =
      parse_document(document, default_question_id, normalization, &order);
  std::vector<RuleSet> sets;
  for (const auto& id : order) sets.push_back(RuleSet{id, {}});
  for (auto& pc : clauses) {
    for (auto& set : sets) {
      if (set.question_id == pc.question_id) {
        set.clauses.push_back(std::move(pc.clause));
        break;
      }
    }
  }
  return sets;
}

std::vector<DropRule> parse_drop_rules(
    std::string_view document, std::string_view default_question_id,
    const NormalizationRuleTable* normalization) {
  std::vector<std::string> order;
  auto clauses =
      parse_document(document, default_question_id, normalization, &order);
  std::vector<DropRule> rules;
  rules.reserve(clauses.size());
  for (auto& pc : clauses) {
    rules.push_back(DropRule{pc.question_id, std::move(pc.clause.expr)});
  }
  return rules;
}

std::string print_rule(const RuleExpr& expr) {
  std::string out;
  print_expr(expr, out);
  return out;
}

std::string print_rules(const RuleSet& rules) {
  std::string out = "[" + rules.question_id + "]\n";
  for (const auto& c : rules.clauses) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c.weight);
    out.append(buf, ptr);
    out.push_back('\t');
    print_expr(c.expr, out);
    out.push_back('\n');
  }
  return out;
}

bool eval_rule(const RuleExpr& expr, std::u32string_view text) {
  switch (expr.kind) {
    case RuleExpr::Kind::kTerm:
      return text.find(expr.term) != std::u32string_view::npos;
    case RuleExpr::Kind::kAny:
      for (const auto& c : expr.children) {
        if (eval_rule(c, text)) return true;
      }
      return false;
    case RuleExpr::Kind::kAll:
      for (const auto& c : expr.children) {
        if (!eval_rule(c, text)) return false;
      }
      return true;
    case RuleExpr::Kind::kNot:
      return !eval_rule(expr.children.front(), text);
  }
  return false;
}

bool eval_rule(const RuleExpr& expr, const NormalizedText& text) {
  return eval_rule(expr, std::u32string_view(text.chars()));
}

void validate_rules(const RuleSet& rules) {
  if (rules.clauses.empty()) {
    throw ConfigError("question '" + rules.question_id +
                      "' has an empty rule set");
  }
  for (const auto& c : rules.clauses) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw ConfigError("question '" + rules.question_id +
                        "' has a non-positive clause weight");
    }
  }
}

bool contains_negation(const RuleExpr& expr) {
  if (expr.kind == RuleExpr::Kind::kNot) return true;
  for (const auto& c : expr.children) {
    if (contains_negation(c)) return true;
  }
  return false;
}

void lint_no_negation(const RuleSet& rules) {
  for (std::size_t i = 0; i < rules.clauses.size(); ++i) {
    if (contains_negation(rules.clauses[i].expr)) {
      throw ConfigError("question '" + rules.question_id + "' clause " +
                        std::to_string(i + 1) +
                        " uses NOT, which helpfulness rules forbid");
    }
  }
}

double rule_score(const RuleSet& rules, const NormalizedText& text) {
  validate_rules(rules);
  double satisfied = 0.0;
  for (const auto& c : rules.clauses) {
    if (eval_rule(c.expr, text)) satisfied += c.weight;
  }
  return satisfied / rules.total_weight();
}

}  // namespace ngeval
