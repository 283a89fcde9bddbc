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

#include "ngeval/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ngeval/digest.hpp"
#include "ngeval/errors.hpp"
#include "ngeval/ngram_index.hpp"
#include "ngeval/pipeline.hpp"
#include "ngeval/records.hpp"
#include "ngeval/rules.hpp"

namespace ngeval {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': bad number '" +
                      std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "off" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': bad boolean '" +
                    std::string(value) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const char* convention_name(FluencyConvention c) {
  return c == FluencyConvention::kSelfInclusive ? "self_inclusive"
                                                : "leave_one_out";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// HarnessConfig

void HarnessConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "keep") {
    keep = parse_number<std::size_t>(key, value);
    if (keep == 0) throw ConfigError("config key 'keep' must be positive");
  } else if (key == "length_keep") {
    length_keep = parse_number<std::size_t>(key, value);
    if (length_keep == 0) {
      throw ConfigError("config key 'length_keep' must be positive");
    }
  } else if (key == "target_length") {
    target_length = parse_number<std::size_t>(key, value);
  } else if (key == "max_iters") {
    max_iters = parse_number<std::size_t>(key, value);
  } else if (key == "rare_width") {
    rare_width = parse_number<int>(key, value);
    if (rare_width < 1 || rare_width > kMaxGramWidth) {
      throw ConfigError("config key 'rare_width' must be in 1..10");
    }
  } else if (key == "rare_include_sentinels") {
    rare_include_sentinels = parse_bool(key, value);
  } else if (key == "swap_policy") {
    if (value == "best") {
      swap_policy = SwapPolicy::kBestImprovement;
    } else if (value == "first") {
      swap_policy = SwapPolicy::kFirstImprovement;
    } else {
      throw ConfigError("config key 'swap_policy' must be best or first");
    }
  } else if (key == "threshold") {
    threshold = parse_number<double>(key, value);
    if (!(threshold > 0.0 && threshold <= 1.0)) {
      throw ConfigError("config key 'threshold' must be in (0, 1]");
    }
  } else if (key == "strict") {
    strict = parse_bool(key, value);
  } else if (key == "forbid_negation") {
    forbid_negation = parse_bool(key, value);
  } else if (key == "fluency_convention") {
    if (value == "self_inclusive") {
      fluency_convention = FluencyConvention::kSelfInclusive;
    } else if (value == "leave_one_out") {
      fluency_convention = FluencyConvention::kLeaveOneOut;
    } else {
      throw ConfigError(
          "config key 'fluency_convention' must be self_inclusive or "
          "leave_one_out");
    }
  } else if (key == "normalization_file") {
    normalization_file = std::string(value);
  } else if (key == "punctuation_file") {
    punctuation_file = std::string(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

HarnessConfig HarnessConfig::Parse(std::string_view document) {
  HarnessConfig config;
  std::istringstream in{std::string(document)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    config.set(trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  return config;
}

HarnessConfig HarnessConfig::FromFile(const fs::path& path) {
  return Parse(read_text_file(path));
}

std::string HarnessConfig::canonical() const {
  std::ostringstream out;
  out << "seed = " << seed << '\n'
      << "keep = " << keep << '\n'
      << "length_keep = " << length_keep << '\n'
      << "target_length = " << target_length << '\n'
      << "max_iters = " << max_iters << '\n'
      << "rare_width = " << rare_width << '\n'
      << "rare_include_sentinels = " << (rare_include_sentinels ? "true" : "false") << '\n'
      << "swap_policy = "
      << (swap_policy == SwapPolicy::kBestImprovement ? "best" : "first") << '\n'
      << "threshold = " << format_double(threshold) << '\n'
      << "strict = " << (strict ? "true" : "false") << '\n'
      << "forbid_negation = " << (forbid_negation ? "true" : "false") << '\n'
      << "fluency_convention = " << convention_name(fluency_convention) << '\n'
      << "normalization_file = " << normalization_file << '\n'
      << "punctuation_file = " << punctuation_file << '\n';
  return out.str();
}

std::uint64_t HarnessConfig::digest() const {
  // File paths are replaced by the digests of what they load, so the same
  // tables under different paths give the same digest.
  Fnv1a h;
  std::istringstream in(canonical());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("normalization_file", 0) == 0 ||
        line.rfind("punctuation_file", 0) == 0) {
      continue;
    }
    h.update_field(line);
  }
  h.update_u64(normalization().digest());
  h.update_u64(punctuation().digest());
  return h.value();
}

NormalizationRuleTable HarnessConfig::normalization() const {
  if (normalization_file.empty()) return NormalizationRuleTable::Default();
  return NormalizationRuleTable::FromFile(normalization_file);
}

PunctuationSet HarnessConfig::punctuation() const {
  if (punctuation_file.empty()) return PunctuationSet::Default();
  return PunctuationSet::FromFile(punctuation_file);
}

// ---------------------------------------------------------------------------
// build-refset

int cmd_build_refset(const BuildRefsetArgs& args, const HarnessConfig& config,
                     std::ostream& log) {
  const NormalizationRuleTable table = config.normalization();
  const PunctuationSet punctuation = config.punctuation();
  const auto questions = read_questions(args.questions);

  std::ifstream candidates_in(args.candidates);
  if (!candidates_in) {
    log << "error: cannot open " << args.candidates.string() << '\n';
    return kExitFailure;
  }
  IngestResult ingested =
      ingest_candidates(candidates_in, table, punctuation, config.strict);
  for (const auto& w : ingested.warnings) log << "warning: " << w << '\n';

  std::set<std::string> known;
  for (const auto& q : questions) known.insert(q.question_id);
  bool failed = false;
  for (const auto& [qid, pool] : ingested.pools) {
    if (known.count(qid) == 0) {
      log << (config.strict ? "error" : "warning") << ": candidates for unknown question '"
          << qid << "'\n";
      failed = failed || config.strict;
    }
  }
  for (const auto& q : questions) {
    if (ingested.pools.count(q.question_id) == 0) {
      log << "error: no candidates for question '" << q.question_id << "'\n";
      failed = true;
    }
  }
  if (failed) return kExitFailure;

  fs::create_directories(args.out_dir);
  Json report;
  report["tool"] = "ngeval";
  report["version"] = kToolVersion;
  report["config_digest"] = digest_hex(config.digest());
  report["normalization_digest"] = digest_hex(table.digest());
  report["punctuation_digest"] = digest_hex(punctuation.digest());
  report["questions"] = Json::array();

  for (const auto& q : questions) {
    const CandidatePool& pool = ingested.pools.at(q.question_id);
    Json stage;
    stage["question_id"] = q.question_id;
    stage["input"] = pool.size();

    std::vector<DropRule> drops;
    if (!args.drop_rules_dir.empty()) {
      const fs::path drop_path = args.drop_rules_dir / (q.question_id + ".drop");
      if (fs::exists(drop_path)) {
        drops = parse_drop_rules(read_text_file(drop_path), q.question_id, &table);
      }
    }
    DropOutcome dropped = apply_drop_rules(pool, drops);
    for (const auto& w : dropped.warnings) log << "warning: " << w << '\n';
    stage["drop_rules"] = drops.size();
    stage["drop_rule_matches"] = dropped.matched_per_rule;
    stage["after_drop_rules"] = dropped.pool.size();

    RareOutcome rare = rare_gram_filter(
        dropped.pool, {config.rare_width, config.rare_include_sentinels});
    stage["after_rare_filter"] = rare.pool.size();

    LengthOutcome length =
        length_refine(rare.pool, config.length_keep, config.target_length);
    for (const auto& w : length.warnings) log << "warning: " << w << '\n';
    stage["after_length_refine"] = length.pool.size();
    stage["length_mean"] = length.stats.mean;
    stage["length_stddev"] = length.stats.stddev;

    if (length.pool.empty()) {
      log << "error: question '" << q.question_id
          << "' has no candidates left (input " << pool.size()
          << ", after drop rules " << dropped.pool.size()
          << ", after rare-gram filter " << rare.pool.size() << ")\n";
      stage["final"] = 0;
      report["questions"].push_back(stage);
      failed = true;
      continue;
    }

    RefineOptions refine_options;
    refine_options.keep = config.keep;
    refine_options.seed =
        Fnv1a().update_u64(config.seed).update_field(q.question_id).value();
    refine_options.max_iters = config.max_iters;
    refine_options.target_length = config.target_length;
    refine_options.moves = config.swap_policy;
    RefineResult refined = distribution_refine(length.pool, refine_options);
    for (const auto& w : refined.warnings) log << "warning: " << w << '\n';

    const LengthStats final_stats = length_stats(refined.pool);
    stage["final"] = refined.pool.size();
    stage["final_length_mean"] = final_stats.mean;
    stage["final_length_stddev"] = final_stats.stddev;
    stage["initial_mse"] = refined.initial_mse;
    stage["final_mse"] = refined.final_mse;
    stage["accepted_swaps"] = refined.trace.size();
    stage["sweeps"] = refined.sweeps;
    report["questions"].push_back(stage);

    RefsetFile out;
    out.question_id = q.question_id;
    out.normalization_digest = table.digest();
    out.punctuation_digest = punctuation.digest();
    for (std::size_t i = 0; i < refined.pool.size(); ++i) {
      out.texts.push_back(refined.pool.texts[i].utf8());
      out.sources.push_back(refined.pool.sources[i]);
    }
    std::ostringstream buf;
    write_refset(buf, out);
    write_text_file(args.out_dir / (q.question_id + ".refset"), buf.str());
    log << q.question_id << ": " << pool.size() << " -> "
        << refined.pool.size() << " reference answers\n";
  }

  const fs::path report_path = args.report.empty()
                                   ? args.out_dir / "pipeline_report.json"
                                   : args.report;
  write_text_file(report_path, report.dump(2) + "\n");
  return failed ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// score

namespace {

constexpr char kCacheMagic[8] = {'N', 'G', 'E', 'V', 'C', 'A', 'C', 'H'};

// Cache file: magic, refset digest, convention, normalizer bits, index.
std::optional<ReferenceSet> load_cached(const fs::path& path,
                                        std::uint64_t refset_digest,
                                        FluencyConvention convention) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t digest = 0, conv = 0, bits = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(&digest), 8) ||
      !in.read(reinterpret_cast<char*>(&conv), 8) ||
      !in.read(reinterpret_cast<char*>(&bits), 8)) {
    return std::nullopt;
  }
  if (digest != refset_digest || conv != static_cast<std::uint64_t>(convention)) {
    return std::nullopt;
  }
  ReferenceSet refset;
  try {
    refset.table = NGramTable::load(in);
  } catch (const Error&) {
    return std::nullopt;
  }
  double normalizer;
  std::memcpy(&normalizer, &bits, sizeof normalizer);
  refset.fluency_normalizer = normalizer;
  return refset;
}

void store_cached(const fs::path& path, std::uint64_t refset_digest,
                  FluencyConvention convention, const ReferenceSet& refset,
                  const NGramTable::Stamp& stamp) {
  std::ostringstream out(std::ios::binary);
  out.write(kCacheMagic, 8);
  const std::uint64_t conv = static_cast<std::uint64_t>(convention);
  std::uint64_t bits;
  std::memcpy(&bits, &*refset.fluency_normalizer, sizeof bits);
  out.write(reinterpret_cast<const char*>(&refset_digest), 8);
  out.write(reinterpret_cast<const char*>(&conv), 8);
  out.write(reinterpret_cast<const char*>(&bits), 8);
  refset.table.save(out, stamp);
  write_text_file(path, out.str());
}

Json triple_fields(Json j, const MetricTriple& m) {
  j["score"] = m.final_score;
  j["fluency"] = m.fluency;
  j["truthfulness"] = m.truthfulness;
  j["helpfulness"] = m.helpfulness;
  return j;
}

bool leaderboard_order(const ModelScore& a, const ModelScore& b) {
  if (a.overall.final_score != b.overall.final_score) {
    return a.overall.final_score > b.overall.final_score;
  }
  return a.model < b.model;
}

}  // namespace

int cmd_score(const ScoreArgs& args, const HarnessConfig& config,
              std::ostream& out, std::ostream& log) {
  const NormalizationRuleTable table = config.normalization();
  const PunctuationSet punctuation = config.punctuation();
  const auto questions = read_questions(args.questions);
  std::map<std::string, std::string> subject_of;
  for (const auto& q : questions) subject_of[q.question_id] = q.subject;

  std::ifstream responses_in(args.responses);
  if (!responses_in) {
    log << "error: cannot open " << args.responses.string() << '\n';
    return kExitFailure;
  }
  std::vector<ResponseRecord> responses;
  std::vector<std::string> gaps;
  for_each_response(
      responses_in, config.strict,
      [&](ResponseRecord r, int line_no) {
        if (subject_of.count(r.question_id) == 0) {
          gaps.push_back("line " + std::to_string(line_no) +
                         ": unknown question '" + r.question_id + "'");
          return;
        }
        responses.push_back(std::move(r));
      },
      [&](const std::string& w) { log << "warning: " << w << '\n'; });

  std::set<std::string> used;
  for (const auto& r : responses) used.insert(r.question_id);
  for (const auto& qid : used) {
    if (!fs::exists(args.refset_dir / (qid + ".refset"))) {
      gaps.push_back("missing refset for question '" + qid + "'");
    }
    if (!fs::exists(args.rules_dir / (qid + ".rules"))) {
      gaps.push_back("missing rules for question '" + qid + "'");
    }
  }
  if (responses.empty()) gaps.push_back("no responses to score");
  if (!gaps.empty()) {
    for (const auto& g : gaps) log << "error: " << g << '\n';
    return kExitFailure;
  }

  std::map<std::string, ReferenceSet> refsets;
  std::map<std::string, RuleSet> rules;
  Fnv1a refset_digest;
  for (const auto& qid : used) {
    const fs::path refset_path = args.refset_dir / (qid + ".refset");
    const std::string refset_bytes = read_text_file(refset_path);
    std::istringstream refset_in(refset_bytes);
    RefsetFile file = read_refset(refset_in);
    if (file.question_id != qid) {
      log << "error: " << refset_path.string() << " holds question '"
          << file.question_id << "'\n";
      return kExitFailure;
    }
    if (file.normalization_digest != table.digest() ||
        file.punctuation_digest != punctuation.digest()) {
      log << "error: " << refset_path.string()
          << " was built with a different normalization table or "
             "punctuation set\n";
      return kExitFailure;
    }
    const std::uint64_t file_digest = Fnv1a().update(refset_bytes).value();
    refset_digest.update_field(qid).update_u64(file_digest);

    std::optional<ReferenceSet> refset;
    const fs::path cache_path =
        args.cache_dir.empty() ? fs::path() : args.cache_dir / (qid + ".ngx");
    if (!cache_path.empty()) {
      refset = load_cached(cache_path, file_digest, config.fluency_convention);
    }
    if (!refset) {
      std::vector<NormalizedText> answers;
      answers.reserve(file.texts.size());
      for (const auto& t : file.texts) {
        answers.push_back(NormalizedText::FromNormalized(decode_utf8(t), punctuation));
      }
      refset = build_reference_set(qid, std::move(answers),
                                   config.fluency_convention);
      if (!cache_path.empty()) {
        store_cached(cache_path, file_digest, config.fluency_convention,
                     *refset, {punctuation.digest(), table.digest()});
      }
    }
    refset->question_id = qid;
    refsets.emplace(qid, std::move(*refset));

    const fs::path rules_path = args.rules_dir / (qid + ".rules");
    auto sets = parse_rules(read_text_file(rules_path), qid, &table);
    auto it = std::find_if(sets.begin(), sets.end(),
                           [&](const RuleSet& s) { return s.question_id == qid; });
    if (it == sets.end()) {
      log << "error: " << rules_path.string() << " has no rules for '" << qid << "'\n";
      return kExitFailure;
    }
    validate_rules(*it);
    if (config.forbid_negation) lint_no_negation(*it);
    rules.emplace(qid, std::move(*it));
  }

  std::map<std::string, std::vector<std::pair<std::string, MetricTriple>>> by_model;
  for (const auto& r : responses) {
    const NormalizedText text =
        normalize_text(std::string_view(r.response), table, punctuation);
    by_model[r.model].emplace_back(
        r.question_id, score_response(text, refsets.at(r.question_id),
                                      rules.at(r.question_id), config.threshold));
  }

  std::vector<std::pair<ModelScore, Json>> rows;
  for (const auto& [model, scores] : by_model) {
    const ScoreSummary summary = aggregate(scores, &subject_of);
    ModelScore row{model, summary.overall, summary.responses,
                   summary.questions.size()};
    Json j;
    j["model"] = model;
    j["responses"] = summary.responses;
    j["questions"] = summary.questions.size();
    j = triple_fields(std::move(j), summary.overall);
    j["per_question"] = Json::array();
    for (const auto& [qid, qs] : summary.questions) {
      Json qj;
      qj["question_id"] = qid;
      qj["subject"] = subject_of.at(qid);
      qj["responses"] = qs.responses;
      j["per_question"].push_back(triple_fields(std::move(qj), qs.mean));
    }
    j["per_subject"] = Json::array();
    for (const auto& [subject, ss] : summary.subjects) {
      Json sj;
      sj["subject"] = subject;
      sj["questions"] = ss.questions;
      j["per_subject"].push_back(triple_fields(std::move(sj), ss.mean));
    }
    rows.emplace_back(row, std::move(j));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return leaderboard_order(a.first, b.first);
  });

  Json report;
  report["tool"] = "ngeval";
  report["version"] = kToolVersion;
  report["config_digest"] = digest_hex(config.digest());
  report["refset_digest"] = digest_hex(refset_digest.value());
  report["normalization_digest"] = digest_hex(table.digest());
  report["punctuation_digest"] = digest_hex(punctuation.digest());
  report["threshold"] = config.threshold;
  report["fluency_convention"] = convention_name(config.fluency_convention);
  report["models"] = Json::array();
  std::vector<ModelScore> leaderboard;
  for (auto& [row, j] : rows) {
    report["models"].push_back(std::move(j));
    leaderboard.push_back(row);
  }
  write_text_file(args.out, report.dump(2) + "\n");

  const std::string table_text =
      render_leaderboard(leaderboard, TableFormat::kMarkdown);
  if (!args.markdown.empty()) {
    write_text_file(args.markdown, table_text);
  } else {
    out << table_text;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

std::vector<ModelScore> read_leaderboard(const fs::path& report) {
  Json j;
  try {
    j = Json::parse(read_text_file(report));
  } catch (const Json::exception& e) {
    throw Error(report.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("models") || !j["models"].is_array()) {
    throw Error(report.string() + ": not a score report");
  }
  std::vector<ModelScore> rows;
  try {
    for (const auto& m : j["models"]) {
      ModelScore row;
      row.model = m.at("model").get<std::string>();
      row.overall.fluency = m.at("fluency").get<double>();
      row.overall.truthfulness = m.at("truthfulness").get<double>();
      row.overall.helpfulness = m.at("helpfulness").get<double>();
      row.overall.final_score = m.at("score").get<double>();
      row.responses = m.value("responses", std::size_t{0});
      row.questions = m.value("questions", std::size_t{0});
      rows.push_back(std::move(row));
    }
  } catch (const Json::exception& e) {
    throw Error(report.string() + ": " + e.what());
  }
  std::sort(rows.begin(), rows.end(), leaderboard_order);
  return rows;
}

std::optional<TableFormat> parse_table_format(std::string_view name) {
  if (name == "markdown" || name == "md") return TableFormat::kMarkdown;
  if (name == "tsv") return TableFormat::kTsv;
  return std::nullopt;
}

std::string render_leaderboard(const std::vector<ModelScore>& rows,
                               TableFormat format) {
  std::string out;
  if (format == TableFormat::kTsv) {
    out += "model\tscore\tfluency\ttruthfulness\thelpfulness\n";
    for (const auto& r : rows) {
      out += r.model + "\t" + fixed(r.overall.final_score, 6) + "\t" +
             fixed(r.overall.fluency, 6) + "\t" +
             fixed(r.overall.truthfulness, 6) + "\t" +
             fixed(r.overall.helpfulness, 6) + "\n";
    }
    return out;
  }
  out += "| Model | Score | Fluency | Truthfulness | Helpfulness |\n";
  out += "|:--|--:|--:|--:|--:|\n";
  for (const auto& r : rows) {
    std::string name;
    for (char c : r.model) {
      if (c == '|') name += "\\";
      name.push_back(c);
    }
    out += "| " + name + " | " + fixed(r.overall.final_score, 4) + " | " +
           fixed(r.overall.fluency, 3) + " | " +
           fixed(r.overall.truthfulness, 3) + " | " +
           fixed(r.overall.helpfulness, 3) + " |\n";
  }
  return out;
}

int cmd_report(const fs::path& report, std::string_view format,
               std::ostream& out, std::ostream& log) {
  const auto fmt = parse_table_format(format);
  if (!fmt) {
    log << "error: unknown format '" << format << "' (use markdown or tsv)\n";
    return kExitUsage;
  }
  out << render_leaderboard(read_leaderboard(report), *fmt);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// correlate

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("pearson: series differ in length");
  if (x.size() < 2) throw Error("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error("correlation undefined: a series has zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::map<std::string, double> read_external_scores(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::map<std::string, double> scores;
  {
    Json whole = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (whole.is_object() && whole.contains("models")) {
      for (const auto& row : read_leaderboard(path)) {
        scores[row.model] = row.overall.final_score;
      }
      return scores;
    }
  }
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::string model;
    double score;
    if (body.front() == '{') {
      try {
        const Json j = Json::parse(body);
        model = j.at("model").get<std::string>();
        score = j.at("score").get<double>();
      } catch (const Json::exception& e) {
        throw ParseError(std::string("bad score record: ") + e.what(), line_no, 1);
      }
    } else {
      const auto tab = body.rfind('\t');
      if (tab == std::string_view::npos) {
        throw ParseError("expected model<TAB>score", line_no, 1);
      }
      model = std::string(trim(body.substr(0, tab)));
      const std::string_view value = trim(body.substr(tab + 1));
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), score);
      if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
        throw ParseError("bad score '" + std::string(value) + "'", line_no,
                         static_cast<int>(tab) + 2);
      }
    }
    if (!scores.emplace(model, score).second) {
      throw ConfigError(path.string() + ": duplicate model '" + model + "'");
    }
  }
  return scores;
}

Correlation correlate(const std::vector<ModelScore>& ours,
                      const std::map<std::string, double>& theirs) {
  std::map<std::string, double> mine;
  for (const auto& row : ours) mine[row.model] = row.overall.final_score;
  Correlation c;
  for (const auto& [model, score] : mine) {
    auto it = theirs.find(model);
    if (it == theirs.end()) continue;
    c.models.push_back(model);
    c.ours.push_back(score);
    c.theirs.push_back(it->second);
  }
  if (c.models.size() < 3) {
    throw Error("correlation needs at least 3 models in common, found " +
                std::to_string(c.models.size()));
  }
  c.r = pearson(c.ours, c.theirs);
  return c;
}

int cmd_correlate(const fs::path& report, const fs::path& external,
                  std::ostream& out, std::ostream& log) {
  Correlation c;
  try {
    c = correlate(read_leaderboard(report), read_external_scores(external));
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  out << "model\tscore\texternal\n";
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    out << c.models[i] << '\t' << format_double(c.ours[i]) << '\t'
        << format_double(c.theirs[i]) << '\n';
  }
  out << "n\t" << c.models.size() << '\n';
  out << "pearson_r\t" << format_double(c.r) << '\n';
  return kExitOk;
}

}  // namespace ngeval
