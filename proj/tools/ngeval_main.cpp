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

// ngeval: build reference answer sets, score responses, render leaderboards
// and correlate against external scores.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ngeval/errors.hpp"
#include "ngeval/harness.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> keep;
  std::optional<std::size_t> length_keep;
  std::optional<std::size_t> max_iters;
  std::optional<double> threshold;
  std::optional<std::string> fluency_convention;
  std::optional<std::string> swap_policy;
  std::optional<std::string> normalization;
  std::optional<std::string> punctuation;
  bool strict = false;

  ngeval::HarnessConfig resolve() const {
    ngeval::HarnessConfig config =
        config_file.empty() ? ngeval::HarnessConfig{}
                            : ngeval::HarnessConfig::FromFile(config_file);
    if (seed) config.set("seed", std::to_string(*seed));
    if (keep) config.set("keep", std::to_string(*keep));
    if (length_keep) config.set("length_keep", std::to_string(*length_keep));
    if (max_iters) config.set("max_iters", std::to_string(*max_iters));
    if (threshold) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", *threshold);
      config.set("threshold", buf);
    }
    if (fluency_convention) config.set("fluency_convention", *fluency_convention);
    if (swap_policy) config.set("swap_policy", *swap_policy);
    if (normalization) config.set("normalization_file", *normalization);
    if (punctuation) config.set("punctuation_file", *punctuation);
    if (strict) config.strict = true;
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Judge-free n-gram evaluation of open-ended answers"};
  app.set_version_flag("--version", ngeval::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_file, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Seed for hill-climbing tie-breaking");
  app.add_option("--keep", o.keep, "Reference answers kept per question");
  app.add_option("--length-keep", o.length_keep,
                 "Candidates kept by length refinement");
  app.add_option("--max-iters", o.max_iters, "Cap on accepted hill-climb swaps");
  app.add_option("--threshold", o.threshold,
                 "Truthfulness document-frequency threshold");
  app.add_option("--fluency-convention", o.fluency_convention,
                 "self_inclusive or leave_one_out");
  app.add_option("--swap-policy", o.swap_policy,
                 "Hill-climb moves: best (default) or first improvement");
  app.add_option("--normalization", o.normalization,
                 "Normalization rule table (pattern<TAB>replacement)");
  app.add_option("--punctuation", o.punctuation, "Punctuation set file");
  app.add_flag("--strict", o.strict, "Abort on malformed records");

  ngeval::BuildRefsetArgs build;
  std::string drop_dir, build_report;
  auto* build_cmd = app.add_subcommand("build-refset", "Construct reference answer sets");
  build_cmd->add_option("--questions", build.questions, "Questions JSONL")
      ->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--candidates", build.candidates, "Candidate responses JSONL")
      ->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--drop-rules", drop_dir, "Directory of <question_id>.drop files")
      ->envname("NGEVAL_DROP_RULES_DIR");
  build_cmd->add_option("--out", build.out_dir, "Output directory for .refset files")
      ->envname("NGEVAL_REFSET_DIR")->required();
  build_cmd->add_option("--report", build_report, "Pipeline report path");

  ngeval::ScoreArgs score;
  std::string markdown, cache_dir;
  auto* score_cmd = app.add_subcommand("score", "Score a responses file");
  score_cmd->add_option("--questions", score.questions, "Questions JSONL")
      ->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--refsets", score.refset_dir, "Directory of .refset files")
      ->envname("NGEVAL_REFSET_DIR")->required();
  score_cmd->add_option("--rules", score.rules_dir, "Directory of .rules files")
      ->envname("NGEVAL_RULES_DIR")->required();
  score_cmd->add_option("--responses", score.responses, "Responses JSONL")
      ->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--out", score.out, "JSON score report")->required();
  score_cmd->add_option("--markdown", markdown, "Write the leaderboard here");
  score_cmd->add_option("--cache-dir", cache_dir, "Reuse indexes across runs")
      ->envname("NGEVAL_CACHE_DIR");

  std::string report_path, external_path, format = "markdown";
  auto* correlate_cmd =
      app.add_subcommand("correlate", "Pearson correlation against external scores");
  correlate_cmd->add_option("--report", report_path, "Score report")
      ->required()->check(CLI::ExistingFile);
  correlate_cmd->add_option("--external", external_path,
                            "model<TAB>score lines, JSONL, or another report")
      ->required()->check(CLI::ExistingFile);

  auto* report_cmd = app.add_subcommand("report", "Render a leaderboard table");
  report_cmd->add_option("--report", report_path, "Score report")
      ->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", format, "markdown or tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is a
    // usage error.
    const int code = app.exit(e);
    return code == 0 ? ngeval::kExitOk : ngeval::kExitUsage;
  }

  try {
    const ngeval::HarnessConfig config = o.resolve();
    if (*build_cmd) {
      build.drop_rules_dir = drop_dir;
      build.report = build_report;
      return ngeval::cmd_build_refset(build, config, std::cerr);
    }
    if (*score_cmd) {
      score.markdown = markdown;
      score.cache_dir = cache_dir;
      return ngeval::cmd_score(score, config, std::cout, std::cerr);
    }
    if (*correlate_cmd) {
      return ngeval::cmd_correlate(report_path, external_path, std::cout, std::cerr);
    }
    if (*report_cmd) {
      return ngeval::cmd_report(report_path, format, std::cout, std::cerr);
    }
  } catch (const ngeval::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ngeval::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ngeval::kExitFailure;
  }
  return ngeval::kExitUsage;
}
