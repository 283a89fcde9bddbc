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

// Batch commands behind the ngeval CLI. Each command returns a process exit
// code and writes diagnostics to `log`; library errors from malformed inputs
// propagate as exceptions.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ngeval/metrics.hpp"
#include "ngeval/pipeline.hpp"
#include "ngeval/text.hpp"

namespace ngeval {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

// Key-value run configuration. The file form is `key = value` per line with
// `#` comments; keys match the member names.
struct HarnessConfig {
  std::uint64_t seed = 0;
  std::size_t keep = 1000;          // final reference answers per question
  std::size_t length_keep = 30000;  // survivors of length refinement
  std::size_t target_length = 100;
  std::size_t max_iters = 0;        // hill-climb accepted swaps; 0 = 10*keep
  int rare_width = 5;
  bool rare_include_sentinels = true;
  SwapPolicy swap_policy = SwapPolicy::kBestImprovement;
  double threshold = kTruthfulnessThreshold;
  bool strict = false;
  bool forbid_negation = false;  // reject NOT in helpfulness rules
  FluencyConvention fluency_convention = FluencyConvention::kSelfInclusive;
  std::string normalization_file;  // empty = built-in default table
  std::string punctuation_file;    // empty = built-in default set

  // Throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  static HarnessConfig Parse(std::string_view document);
  static HarnessConfig FromFile(const std::filesystem::path& path);

  // Canonical `key = value` text; equal configs print identically.
  std::string canonical() const;
  std::uint64_t digest() const;

  NormalizationRuleTable normalization() const;
  PunctuationSet punctuation() const;
};

struct BuildRefsetArgs {
  std::filesystem::path questions;
  std::filesystem::path candidates;
  std::filesystem::path drop_rules_dir;  // optional; <question_id>.drop
  std::filesystem::path out_dir;         // <question_id>.refset files
  std::filesystem::path report;          // default out_dir/pipeline_report.json
};

int cmd_build_refset(const BuildRefsetArgs& args, const HarnessConfig& config,
                     std::ostream& log);

struct ScoreArgs {
  std::filesystem::path questions;
  std::filesystem::path refset_dir;  // <question_id>.refset
  std::filesystem::path rules_dir;   // <question_id>.rules
  std::filesystem::path responses;
  std::filesystem::path out;       // JSON report
  std::filesystem::path markdown;  // optional leaderboard file
  std::filesystem::path cache_dir; // optional index cache
};

// Writes the leaderboard to `args.markdown`, or to `out` when unset.
int cmd_score(const ScoreArgs& args, const HarnessConfig& config,
              std::ostream& out, std::ostream& log);

// One model's row of a score report.
struct ModelScore {
  std::string model;
  MetricTriple overall;
  std::size_t responses = 0;
  std::size_t questions = 0;
};

// Models ordered by final score descending, then name.
std::vector<ModelScore> read_leaderboard(const std::filesystem::path& report);

enum class TableFormat { kMarkdown, kTsv };
std::optional<TableFormat> parse_table_format(std::string_view name);
std::string render_leaderboard(const std::vector<ModelScore>& rows,
                               TableFormat format);

int cmd_report(const std::filesystem::path& report, std::string_view format,
               std::ostream& out, std::ostream& log);

// Pearson correlation. Throws Error for fewer than two points, mismatched
// lengths or zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// External scores: either another score report, or lines of
// `model<TAB>score` / {"model": ..., "score": ...}.
std::map<std::string, double> read_external_scores(
    const std::filesystem::path& path);

struct Correlation {
  double r = 0.0;
  std::vector<std::string> models;
  std::vector<double> ours;
  std::vector<double> theirs;
};

// Pairs models by name; needs at least three in common.
Correlation correlate(const std::vector<ModelScore>& ours,
                      const std::map<std::string, double>& theirs);

int cmd_correlate(const std::filesystem::path& report,
                  const std::filesystem::path& external, std::ostream& out,
                  std::ostream& log);

}  // namespace ngeval
