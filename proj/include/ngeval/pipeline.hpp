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

// Reference-set construction from raw candidate answers: drop rules, rare
// 5-gram filtering, length refinement and distribution-matching subset
// selection by hill climbing.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ngeval/rules.hpp"
#include "ngeval/text.hpp"

namespace ngeval {

// Candidates for one question. `texts` and `sources` are parallel; order is
// significant (it breaks ties) and duplicates are kept.
struct CandidatePool {
  std::string question_id;
  std::vector<NormalizedText> texts;
  std::vector<std::string> sources;
  std::uint64_t normalization_digest = 0;

  std::size_t size() const { return texts.size(); }
  bool empty() const { return texts.empty(); }
  // Same question and digest, no candidates.
  CandidatePool empty_copy() const;
  void add(NormalizedText text, std::string source);
};

struct IngestResult {
  std::map<std::string, CandidatePool> pools;
  std::vector<std::string> warnings;
  std::size_t records = 0;
};

// Reads a responses file; `model` becomes the provenance tag. Malformed
// records abort with ParseError when `strict`, otherwise they are skipped
// with a warning.
IngestResult ingest_candidates(std::istream& in,
                               const NormalizationRuleTable& table,
                               const PunctuationSet& punctuation, bool strict);

struct DropOutcome {
  CandidatePool pool;
  // Candidates each rule matched; a candidate can count for several rules.
  std::vector<std::size_t> matched_per_rule;
  std::size_t removed = 0;
  std::vector<std::string> warnings;
};

DropOutcome apply_drop_rules(const CandidatePool& pool,
                             std::span<const DropRule> rules);

struct RareGramOptions {
  int width = 5;
  bool include_sentinels = true;
};

struct RareOutcome {
  CandidatePool pool;
  std::size_t removed = 0;
};

// Single pass: counts grams of `width` over the whole pool, then drops every
// candidate holding a gram that occurs exactly once.
RareOutcome rare_gram_filter(const CandidatePool& pool,
                             const RareGramOptions& options = {});

struct LengthStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

LengthStats length_stats(const CandidatePool& pool);

struct LengthOutcome {
  CandidatePool pool;
  LengthStats stats;
  std::vector<std::string> warnings;
};

// Indices of the `keep` candidates closest to `target` characters, ties by
// input order, returned in input order.
std::vector<std::size_t> closest_to_length(const CandidatePool& pool,
                                           std::size_t keep,
                                           std::size_t target);

LengthOutcome length_refine(const CandidatePool& pool, std::size_t keep,
                            std::size_t target = 100);

// Relative frequency of every 1..10-gram (with sentinels) per width.
struct DistributionVector {
  std::array<std::unordered_map<Gram, double, GramHash>, kMaxGramWidth>
      widths;
};

DistributionVector distribution_of(std::span<const NormalizedText> texts);

// Per width, the mean squared frequency difference over the union of keys
// (absent keys count as 0; an empty union contributes 0); then the mean over
// the ten widths.
double mse_distance(const DistributionVector& a, const DistributionVector& b);

enum class SwapPolicy {
  kFirstImprovement,  // accept the first improving swap in sweep order
  kBestImprovement,   // accept the best swap of each full sweep
};

struct RefineOptions {
  std::size_t keep = 1000;
  std::uint64_t seed = 0;
  // Cap on accepted swaps; 0 means 10 * keep.
  std::size_t max_iters = 0;
  std::size_t target_length = 100;
  SwapPolicy moves = SwapPolicy::kBestImprovement;
};

struct RefineResult {
  CandidatePool pool;
  std::vector<std::size_t> selected;  // indices into the input pool
  double initial_mse = 0.0;
  double final_mse = 0.0;
  std::vector<double> trace;  // MSE after each accepted swap
  std::size_t sweeps = 0;
  std::vector<std::string> warnings;
};

// Starts from the `keep` candidates closest to the target length and
// applies single swaps between selected and unselected candidates while
// they strictly lower the MSE against the whole pool's distribution. Stops
// after a sweep without improvement or `max_iters` accepted swaps.
RefineResult distribution_refine(const CandidatePool& pool,
                                 const RefineOptions& options);

}  // namespace ngeval
