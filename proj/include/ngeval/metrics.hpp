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

// Fluency, truthfulness and helpfulness of a single response, and their
// aggregation into per-question and overall scores.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngeval/ngram_index.hpp"
#include "ngeval/rules.hpp"
#include "ngeval/text.hpp"

namespace ngeval {

// Responses are expected to be about this long; longer ones are discounted
// linearly down to zero at kZeroScoreLength.
inline constexpr std::size_t kTargetLength = 100;
inline constexpr std::size_t kZeroScoreLength = 150;
inline constexpr double kTruthfulnessThreshold = 0.005;

// 1 - max(length - 100, 0) / 50, clamped at 0.
double discount(std::size_t length);

// Truncation lengths searched by truthfulness and helpfulness: {L} when
// L <= 100, otherwise 100..L.
std::vector<std::size_t> truncation_lengths(std::size_t length);

struct FluencyBreakdown {
  std::array<double, kMaxGramWidth> per_width{};
  double sum = 0.0;
};

// Undiscounted per-width sums of reference gram probabilities over the
// response's grams, sentinels included. Widths beyond the table's max are 0.
FluencyBreakdown fluency_raw(const NormalizedText& response,
                             const NGramTable& table);

// discount(L) * fluency_raw().sum; 0 for empty text.
double discounted_fluency(const NormalizedText& response,
                          const NGramTable& table);

enum class FluencyConvention {
  kSelfInclusive,  // every answer is scored against the full table
  kLeaveOneOut,    // each answer is scored with its own counts removed
};

// Mean discounted fluency of the reference answers. Throws Error on an
// empty answer set or when the mean is not positive.
double calibrate_fluency(std::span<const NormalizedText> answers,
                         const NGramTable& table,
                         FluencyConvention convention =
                             FluencyConvention::kSelfInclusive);

// Indexes and calibrates in one step.
ReferenceSet build_reference_set(
    std::string question_id, std::vector<NormalizedText> answers,
    FluencyConvention convention = FluencyConvention::kSelfInclusive);

// Normalized fluency. Throws StateError if the set has no normalizer.
double fluency(const NormalizedText& response, const ReferenceSet& refset);

// Truncation-maximized, discounted share of content characters whose
// neighbouring 3-grams reach `threshold` document frequency.
double truthfulness(const NormalizedText& response, const NGramTable& table,
                    double threshold = kTruthfulnessThreshold);

// Truncation-maximized, discounted weighted share of satisfied clauses.
// Throws ConfigError for an empty or invalid rule set.
double helpfulness(const NormalizedText& response, const RuleSet& rules);

struct MetricTriple {
  double fluency = 0.0;
  double truthfulness = 0.0;
  double helpfulness = 0.0;
  double final_score = 0.0;

  static MetricTriple Of(double fluency, double truthfulness,
                         double helpfulness) {
    return {fluency, truthfulness, helpfulness,
            (fluency + truthfulness + helpfulness) / 3.0};
  }

  friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

MetricTriple score_response(const NormalizedText& response,
                            const ReferenceSet& refset, const RuleSet& rules,
                            double threshold = kTruthfulnessThreshold);

struct QuestionScore {
  MetricTriple mean;
  std::size_t responses = 0;
};

struct SubjectScore {
  MetricTriple mean;
  std::size_t questions = 0;
};

struct ScoreSummary {
  std::map<std::string, QuestionScore> questions;
  std::map<std::string, SubjectScore> subjects;
  MetricTriple overall;
  std::size_t responses = 0;
};

// Per-question means over responses, then the unweighted mean over
// questions. Independent of input order. `subject_of` maps question ids to
// subjects for the optional rollup. Throws Error on empty input.
ScoreSummary aggregate(
    std::span<const std::pair<std::string, MetricTriple>> scores,
    const std::map<std::string, std::string>* subject_of = nullptr);

}  // namespace ngeval
