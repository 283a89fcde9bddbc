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

#include "ngeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ngeval/errors.hpp"

namespace ngeval {

double discount(std::size_t length) {
  const double over =
      length > kTargetLength ? static_cast<double>(length - kTargetLength) : 0.0;
  const double span = static_cast<double>(kZeroScoreLength - kTargetLength);
  return std::max(0.0, 1.0 - over / span);
}

std::vector<std::size_t> truncation_lengths(std::size_t length) {
  if (length <= kTargetLength) return {length};
  std::vector<std::size_t> out;
  out.reserve(length - kTargetLength + 1);
  for (std::size_t i = kTargetLength; i <= length; ++i) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Fluency

FluencyBreakdown fluency_raw(const NormalizedText& response,
                             const NGramTable& table) {
  FluencyBreakdown out;
  const std::u32string seq = with_sentinels(response);
  for (std::size_t start = 0; start < seq.size(); ++start) {
    table.walk(seq, start, kMaxGramWidth, [&](int w, GramId id) {
      out.per_width[w - 1] += table.probability(w, id);
    });
  }
  for (double f : out.per_width) out.sum += f;
  return out;
}

double discounted_fluency(const NormalizedText& response,
                          const NGramTable& table) {
  if (response.empty()) return 0.0;
  return discount(response.size()) * fluency_raw(response, table).sum;
}

namespace {

// Fluency of `answer` against `table` minus the answer's own occurrences.
double leave_one_out_fluency(const NormalizedText& answer,
                             const NGramTable& table) {
  if (answer.empty()) return 0.0;
  const NormalizedText single[] = {answer};
  const NGramTable own = NGramTable::Build(single, table.max_width());
  const std::u32string seq = with_sentinels(answer);

  std::array<double, kMaxGramWidth> per_width{};
  for (std::size_t start = 0; start < seq.size(); ++start) {
    GramId own_id = kNoGram;
    table.walk(seq, start, kMaxGramWidth, [&](int w, GramId id) {
      own_id = own.find(w, own_id, seq[start + w - 1]);
      const std::uint64_t rest = table.count(w, id) - own.count(w, own_id);
      const std::uint64_t denom = table.total(w) - own.total(w);
      if (denom > 0) {
        per_width[w - 1] +=
            static_cast<double>(rest) / static_cast<double>(denom);
      }
    });
  }
  double sum = 0.0;
  for (double f : per_width) sum += f;
  return discount(answer.size()) * sum;
}

}  // namespace

double calibrate_fluency(std::span<const NormalizedText> answers,
                         const NGramTable& table,
                         FluencyConvention convention) {
  if (answers.empty()) {
    throw Error("cannot calibrate fluency on an empty answer set");
  }
  double total = 0.0;
  for (const auto& a : answers) {
    total += convention == FluencyConvention::kSelfInclusive
                 ? discounted_fluency(a, table)
                 : leave_one_out_fluency(a, table);
  }
  const double normalizer = total / static_cast<double>(answers.size());
  if (!(normalizer > 0.0)) {
    throw Error("fluency normalizer is not positive; reference answers are "
                "empty or longer than " +
                std::to_string(kZeroScoreLength - 1) + " characters");
  }
  return normalizer;
}

ReferenceSet build_reference_set(std::string question_id,
                                 std::vector<NormalizedText> answers,
                                 FluencyConvention convention) {
  ReferenceSet refset;
  refset.question_id = std::move(question_id);
  refset.table = NGramTable::Build(answers);
  refset.fluency_normalizer =
      calibrate_fluency(answers, refset.table, convention);
  refset.answers = std::move(answers);
  return refset;
}

double fluency(const NormalizedText& response, const ReferenceSet& refset) {
  if (!refset.fluency_normalizer) {
    throw StateError("reference set '" + refset.question_id +
                     "' has no fluency normalizer");
  }
  return discounted_fluency(response, refset.table) /
         *refset.fluency_normalizer;
}

// ---------------------------------------------------------------------------
// Truthfulness
//
// With C_0 = BOS and C_{I+1} = EOS on the response truncated to I
// characters, the value of content character i is
//   min(max(d(G_{i-1}), d(G_i), d(G_{i+1})), threshold) / threshold
// where d is document frequency and G_j is the 3-gram starting at j (valid
// for 0 <= j <= I-1). Only G_{I-1} differs from the untruncated text, so
// characters up to I-3 reuse the full-text values via a prefix sum and the
// last three are recomputed per I.

double truthfulness(const NormalizedText& response, const NGramTable& table,
                    double threshold) {
  if (!(threshold > 0.0) || !(threshold <= 1.0)) {
    throw ArgumentError("truthfulness threshold must be in (0, 1]");
  }
  const std::size_t n = response.size();
  if (n == 0) return 0.0;

  const std::u32string seq = with_sentinels(response);
  auto doc_freq = [&](char32_t a, char32_t b, char32_t c) {
    GramId id = table.find(1, kNoGram, a);
    id = table.find(2, id, b);
    id = table.find(3, id, c);
    return id == kNoGram ? 0.0 : table.doc_frequency(id);
  };

  // full[j]: d(G_j) on the untruncated text, j = 0..n-1.
  std::vector<double> full(n);
  for (std::size_t j = 0; j < n; ++j) {
    full[j] = doc_freq(seq[j], seq[j + 1], seq[j + 2]);
  }
  // tail[I]: d(C_{I-1}, C_I, EOS), the last window of the I-prefix.
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) tail[i] = doc_freq(seq[i - 1], seq[i], kEos);

  auto window = [&](std::ptrdiff_t j, std::size_t cut) -> double {
    if (j < 0 || j > static_cast<std::ptrdiff_t>(cut) - 1) return 0.0;
    if (j == static_cast<std::ptrdiff_t>(cut) - 1) return tail[cut];
    return full[j];
  };
  auto value = [&](std::size_t i, std::size_t cut) {
    const auto j = static_cast<std::ptrdiff_t>(i);
    const double best =
        std::max({window(j - 1, cut), window(j, cut), window(j + 1, cut)});
    return std::min(best, threshold) / threshold;
  };

  // prefix[k] = sum of value(i, n) over content i in 1..k, and the number
  // of content characters in 1..k.
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<std::size_t> content(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    const bool is_content = response.is_content(i - 1);
    prefix[i] = is_content ? prefix[i - 1] + value(i, n) : prefix[i - 1];
    content[i] = content[i - 1] + (is_content ? 1 : 0);
  }

  double best = 0.0;
  for (std::size_t cut : truncation_lengths(n)) {
    if (content[cut] == 0) continue;
    const std::size_t stable = cut >= 3 ? cut - 3 : 0;
    double sum = prefix[stable];
    for (std::size_t i = stable + 1; i <= cut; ++i) {
      if (response.is_content(i - 1)) sum += value(i, cut);
    }
    const double score =
        discount(cut) * (sum / static_cast<double>(content[cut]));
    best = std::max(best, score);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Helpfulness

namespace {

// Terms in depth-first order with the prefix length at which each first
// becomes a substring (SIZE_MAX when absent).
void collect_term_ends(const RuleExpr& e, std::u32string_view text,
                       std::vector<std::size_t>& ends) {
  if (e.kind == RuleExpr::Kind::kTerm) {
    const auto pos = text.find(e.term);
    ends.push_back(pos == std::u32string_view::npos ? SIZE_MAX
                                                    : pos + e.term.size());
    return;
  }
  for (const auto& c : e.children) collect_term_ends(c, text, ends);
}

bool eval_prefix(const RuleExpr& e, const std::vector<std::size_t>& ends,
                 std::size_t& next, std::size_t cut) {
  switch (e.kind) {
    case RuleExpr::Kind::kTerm:
      return ends[next++] <= cut;
    case RuleExpr::Kind::kNot:
      return !eval_prefix(e.children.front(), ends, next, cut);
    case RuleExpr::Kind::kAny: {
      bool any = false;
      for (const auto& c : e.children) any = eval_prefix(c, ends, next, cut) || any;
      return any;
    }
    case RuleExpr::Kind::kAll: {
      bool all = true;
      for (const auto& c : e.children) all = eval_prefix(c, ends, next, cut) && all;
      return all;
    }
  }
  return false;
}

}  // namespace

double helpfulness(const NormalizedText& response, const RuleSet& rules) {
  validate_rules(rules);
  if (response.empty()) return 0.0;

  std::vector<std::vector<std::size_t>> ends(rules.clauses.size());
  for (std::size_t k = 0; k < rules.clauses.size(); ++k) {
    collect_term_ends(rules.clauses[k].expr, response.chars(), ends[k]);
  }
  const double total = rules.total_weight();

  double best = 0.0;
  for (std::size_t cut : truncation_lengths(response.size())) {
    double satisfied = 0.0;
    for (std::size_t k = 0; k < rules.clauses.size(); ++k) {
      std::size_t next = 0;
      if (eval_prefix(rules.clauses[k].expr, ends[k], next, cut)) {
        satisfied += rules.clauses[k].weight;
      }
    }
    best = std::max(best, discount(cut) * (satisfied / total));
  }
  return best;
}

// ---------------------------------------------------------------------------

MetricTriple score_response(const NormalizedText& response,
                            const ReferenceSet& refset, const RuleSet& rules,
                            double threshold) {
  return MetricTriple::Of(fluency(response, refset),
                          truthfulness(response, refset.table, threshold),
                          helpfulness(response, rules));
}

namespace {

MetricTriple mean_of(std::vector<MetricTriple> triples) {
  // Sorting first makes the floating-point sums independent of input order.
  std::sort(triples.begin(), triples.end(),
            [](const MetricTriple& a, const MetricTriple& b) {
              return std::tie(a.fluency, a.truthfulness, a.helpfulness) <
                     std::tie(b.fluency, b.truthfulness, b.helpfulness);
            });
  double f = 0.0, t = 0.0, h = 0.0;
  for (const auto& m : triples) {
    f += m.fluency;
    t += m.truthfulness;
    h += m.helpfulness;
  }
  const auto n = static_cast<double>(triples.size());
  return MetricTriple::Of(f / n, t / n, h / n);
}

}  // namespace

ScoreSummary aggregate(
    std::span<const std::pair<std::string, MetricTriple>> scores,
    const std::map<std::string, std::string>* subject_of) {
  if (scores.empty()) throw Error("cannot aggregate an empty score list");

  std::map<std::string, std::vector<MetricTriple>> by_question;
  for (const auto& [qid, triple] : scores) by_question[qid].push_back(triple);

  ScoreSummary summary;
  summary.responses = scores.size();
  std::vector<MetricTriple> question_means;
  std::map<std::string, std::vector<MetricTriple>> by_subject;
  for (auto& [qid, triples] : by_question) {
    QuestionScore qs;
    qs.responses = triples.size();
    qs.mean = mean_of(std::move(triples));
    question_means.push_back(qs.mean);
    if (subject_of != nullptr) {
      auto it = subject_of->find(qid);
      by_subject[it == subject_of->end() ? std::string() : it->second]
          .push_back(qs.mean);
    }
    summary.questions.emplace(qid, qs);
  }

  // Questions are already in key order; plain sums keep the overall mean
  // equal to the mean of the per-question rows.
  double f = 0.0, t = 0.0, h = 0.0;
  for (const auto& m : question_means) {
    f += m.fluency;
    t += m.truthfulness;
    h += m.helpfulness;
  }
  const auto nq = static_cast<double>(question_means.size());
  summary.overall = MetricTriple::Of(f / nq, t / nq, h / nq);

  for (auto& [subject, means] : by_subject) {
    SubjectScore ss;
    ss.questions = means.size();
    ss.mean = mean_of(std::move(means));
    summary.subjects.emplace(subject, ss);
  }
  return summary;
}

}  // namespace ngeval
