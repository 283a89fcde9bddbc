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

#include "ngeval/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>

#include "ngeval/errors.hpp"
#include "ngeval/ngram_index.hpp"
#include "ngeval/records.hpp"

namespace ngeval {

CandidatePool CandidatePool::empty_copy() const {
  CandidatePool out;
  out.question_id = question_id;
  out.normalization_digest = normalization_digest;
  return out;
}

void CandidatePool::add(NormalizedText text, std::string source) {
  texts.push_back(std::move(text));
  sources.push_back(std::move(source));
}

IngestResult ingest_candidates(std::istream& in,
                               const NormalizationRuleTable& table,
                               const PunctuationSet& punctuation, bool strict) {
  IngestResult result;
  const std::uint64_t digest = table.digest();
  for_each_response(
      in, strict,
      [&](ResponseRecord record, int line_no) {
        NormalizedText text;
        try {
          text = normalize_text(std::string_view(record.response), table,
                                punctuation);
        } catch (const Error& e) {
          if (strict) throw ParseError(e.what(), line_no, 1);
          result.warnings.push_back("line " + std::to_string(line_no) +
                                    ": skipping record: " + e.what());
          return;
        }
        auto [it, inserted] = result.pools.try_emplace(record.question_id);
        if (inserted) {
          it->second.question_id = record.question_id;
          it->second.normalization_digest = digest;
        }
        it->second.add(std::move(text), std::move(record.model));
        ++result.records;
      },
      [&](const std::string& w) { result.warnings.push_back(w); });
  return result;
}

DropOutcome apply_drop_rules(const CandidatePool& pool,
                             std::span<const DropRule> rules) {
  DropOutcome out;
  out.pool = pool.empty_copy();
  out.matched_per_rule.assign(rules.size(), 0);
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (rules[r].question_id != pool.question_id) {
      out.warnings.push_back("drop rule " + std::to_string(r + 1) +
                             " is bound to '" + rules[r].question_id +
                             "', not '" + pool.question_id + "'; ignored");
    }
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool drop = false;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (rules[r].question_id != pool.question_id) continue;
      if (eval_rule(rules[r].expr, pool.texts[i])) {
        ++out.matched_per_rule[r];
        drop = true;
      }
    }
    if (drop) {
      ++out.removed;
    } else {
      out.pool.add(pool.texts[i], pool.sources[i]);
    }
  }
  if (out.pool.empty() && !pool.empty()) {
    out.warnings.push_back("drop rules removed every candidate of '" +
                           pool.question_id + "'");
  }
  return out;
}

RareOutcome rare_gram_filter(const CandidatePool& pool,
                             const RareGramOptions& options) {
  if (options.width < 1 || options.width > kMaxGramWidth) {
    throw ArgumentError("rare-gram width must be in 1.." +
                        std::to_string(kMaxGramWidth));
  }
  RareOutcome out;
  out.pool = pool.empty_copy();
  const NGramTable table = NGramTable::Build(pool.texts, options.width);
  const auto w = static_cast<std::size_t>(options.width);

  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::u32string seq = with_sentinels(pool.texts[i]);
    bool rare = false;
    for (std::size_t start = 0; !rare && start + w <= seq.size(); ++start) {
      if (!options.include_sentinels &&
          (start == 0 || start + w == seq.size())) {
        continue;
      }
      table.walk(seq, start, options.width, [&](int width, GramId id) {
        if (width == options.width && table.count(width, id) == 1) rare = true;
      });
    }
    if (rare) {
      ++out.removed;
    } else {
      out.pool.add(pool.texts[i], pool.sources[i]);
    }
  }
  return out;
}

LengthStats length_stats(const CandidatePool& pool) {
  LengthStats stats;
  if (pool.empty()) return stats;
  double sum = 0.0;
  for (const auto& t : pool.texts) sum += static_cast<double>(t.size());
  const double n = static_cast<double>(pool.size());
  stats.mean = sum / n;
  double sq = 0.0;
  for (const auto& t : pool.texts) {
    const double d = static_cast<double>(t.size()) - stats.mean;
    sq += d * d;
  }
  stats.stddev = std::sqrt(sq / n);
  return stats;
}

std::vector<std::size_t> closest_to_length(const CandidatePool& pool,
                                           std::size_t keep,
                                           std::size_t target) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto gap = [&](std::size_t i) {
    const std::size_t len = pool.texts[i].size();
    return len > target ? len - target : target - len;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gap(a) < gap(b); });
  order.resize(std::min(keep, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

LengthOutcome length_refine(const CandidatePool& pool, std::size_t keep,
                            std::size_t target) {
  LengthOutcome out;
  if (keep > pool.size()) {
    out.warnings.push_back("length refinement asked for " +
                           std::to_string(keep) + " candidates but '" +
                           pool.question_id + "' has " +
                           std::to_string(pool.size()));
  }
  out.pool = pool.empty_copy();
  for (std::size_t i : closest_to_length(pool, keep, target)) {
    out.pool.add(pool.texts[i], pool.sources[i]);
  }
  out.stats = length_stats(out.pool);
  return out;
}

DistributionVector distribution_of(std::span<const NormalizedText> texts) {
  DistributionVector dist;
  std::array<std::uint64_t, kMaxGramWidth> totals{};
  for (const auto& text : texts) {
    for (int w = 1; w <= kMaxGramWidth; ++w) {
      for (auto& g : extract_grams(text, w)) {
        dist.widths[w - 1][std::move(g)] += 1.0;
        ++totals[w - 1];
      }
    }
  }
  for (int w = 0; w < kMaxGramWidth; ++w) {
    for (auto& [g, v] : dist.widths[w]) v /= static_cast<double>(totals[w]);
  }
  return dist;
}

double mse_distance(const DistributionVector& a, const DistributionVector& b) {
  double total = 0.0;
  std::vector<double> terms;
  for (int w = 0; w < kMaxGramWidth; ++w) {
    const auto& x = a.widths[w];
    const auto& y = b.widths[w];
    terms.clear();
    for (const auto& [g, fx] : x) {
      auto it = y.find(g);
      const double d = fx - (it == y.end() ? 0.0 : it->second);
      terms.push_back(d * d);
    }
    for (const auto& [g, fy] : y) {
      if (x.count(g) == 0) terms.push_back(fy * fy);
    }
    if (terms.empty()) continue;
    // Summed in sorted order so the result does not depend on hash order
    // and mse(a, b) == mse(b, a) exactly.
    std::sort(terms.begin(), terms.end());
    double sq = 0.0;
    for (double t : terms) sq += t;
    total += sq / static_cast<double>(terms.size());
  }
  return total / kMaxGramWidth;
}

namespace {

// Squared-error objective of a subset against the whole pool, kept in exact
// integer form per width:
//   sum_g (c_g/T - p_g/P)^2 = S2/T^2 - 2X/(T P) + Q/P^2
// with c the subset counts, p the pool counts, S2 = sum c^2, X = sum c p,
// Q = sum p^2. The union of keys is always the pool's key set.
class SubsetObjective {
 public:
  explicit SubsetObjective(const CandidatePool& pool) {
    const NGramTable table = NGramTable::Build(pool.texts, kMaxGramWidth);
    grams_.resize(pool.size());
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const std::u32string seq = with_sentinels(pool.texts[c]);
      for (std::size_t start = 0; start < seq.size(); ++start) {
        table.walk(seq, start, kMaxGramWidth, [&](int w, GramId id) {
          grams_[c][w - 1].push_back(id);
        });
      }
      for (auto& ids : grams_[c]) std::sort(ids.begin(), ids.end());
    }
    for (int w = 1; w <= kMaxGramWidth; ++w) {
      auto& pool_counts = pool_counts_[w - 1];
      pool_counts.resize(table.distinct(w));
      for (std::size_t id = 0; id < pool_counts.size(); ++id) {
        pool_counts[id] = static_cast<std::int64_t>(
            table.count(w, static_cast<GramId>(id)));
        pool_sq_[w - 1] += pool_counts[id] * pool_counts[id];
      }
      pool_total_[w - 1] = static_cast<std::int64_t>(table.total(w));
      subset_counts_[w - 1].assign(pool_counts.size(), 0);
    }
  }

  void reset(const std::vector<std::size_t>& selected) {
    for (auto& v : subset_counts_) std::fill(v.begin(), v.end(), 0);
    stats_ = {};
    for (std::size_t c : selected) add(c, +1);
  }

  double mse() const { return mse_of(stats_); }

  double mse_after_swap(std::size_t out, std::size_t in) const {
    std::array<WidthStats, kMaxGramWidth> next = stats_;
    for (int w = 0; w < kMaxGramWidth; ++w) {
      const auto& a = grams_[out][w];
      const auto& b = grams_[in][w];
      const auto& counts = subset_counts_[w];
      const auto& pool_counts = pool_counts_[w];
      WidthStats& s = next[w];
      std::size_t i = 0, j = 0;
      while (i < a.size() || j < b.size()) {
        GramId id;
        if (j >= b.size() || (i < a.size() && a[i] < b[j])) {
          id = a[i];
        } else {
          id = b[j];
        }
        std::int64_t d = 0;
        while (i < a.size() && a[i] == id) {
          --d;
          ++i;
        }
        while (j < b.size() && b[j] == id) {
          ++d;
          ++j;
        }
        if (d != 0) {
          const std::int64_t c = counts[id];
          s.sq += 2 * c * d + d * d;
          s.cross += d * pool_counts[id];
        }
      }
      s.total += static_cast<std::int64_t>(b.size()) -
                 static_cast<std::int64_t>(a.size());
    }
    return mse_of(next);
  }

  void apply_swap(std::size_t out, std::size_t in) {
    add(out, -1);
    add(in, +1);
  }

 private:
  struct WidthStats {
    std::int64_t sq = 0;     // S2
    std::int64_t cross = 0;  // X
    std::int64_t total = 0;  // T
  };

  void add(std::size_t c, std::int64_t sign) {
    for (int w = 0; w < kMaxGramWidth; ++w) {
      WidthStats& s = stats_[w];
      for (GramId id : grams_[c][w]) {
        std::int64_t& count = subset_counts_[w][id];
        s.sq += 2 * count * sign + 1;
        s.cross += sign * pool_counts_[w][id];
        count += sign;
      }
      s.total += sign * static_cast<std::int64_t>(grams_[c][w].size());
    }
  }

  double mse_of(const std::array<WidthStats, kMaxGramWidth>& stats) const {
    double total = 0.0;
    for (int w = 0; w < kMaxGramWidth; ++w) {
      const std::size_t keys = pool_counts_[w].size();
      if (keys == 0) continue;
      const auto p = static_cast<long double>(pool_total_[w]);
      const auto q = static_cast<long double>(pool_sq_[w]);
      long double sum = q / (p * p);
      if (stats[w].total > 0) {
        const auto t = static_cast<long double>(stats[w].total);
        sum += static_cast<long double>(stats[w].sq) / (t * t) -
               2.0L * static_cast<long double>(stats[w].cross) / (t * p);
      }
      total += static_cast<double>(std::max(sum, 0.0L) /
                                   static_cast<long double>(keys));
    }
    return total / kMaxGramWidth;
  }

  std::vector<std::array<std::vector<GramId>, kMaxGramWidth>> grams_;
  std::array<std::vector<std::int64_t>, kMaxGramWidth> pool_counts_;
  std::array<std::vector<std::int64_t>, kMaxGramWidth> subset_counts_;
  std::array<std::int64_t, kMaxGramWidth> pool_sq_{};
  std::array<std::int64_t, kMaxGramWidth> pool_total_{};
  std::array<WidthStats, kMaxGramWidth> stats_{};
};

// Fisher-Yates with modulo draws so the order depends only on the
// mt19937_64 stream, not on the standard library's shuffle.
void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % i]);
  }
}

}  // namespace

RefineResult distribution_refine(const CandidatePool& pool,
                                 const RefineOptions& options) {
  if (options.keep == 0) {
    throw ArgumentError("distribution refinement needs keep >= 1");
  }
  RefineResult result;
  if (options.keep >= pool.size()) {
    if (options.keep > pool.size()) {
      result.warnings.push_back("distribution refinement asked for " +
                                std::to_string(options.keep) +
                                " candidates but '" + pool.question_id +
                                "' has " + std::to_string(pool.size()));
    }
    result.pool = pool;
    for (std::size_t i = 0; i < pool.size(); ++i) result.selected.push_back(i);
    return result;
  }

  SubsetObjective objective(pool);
  std::vector<std::size_t> selected =
      closest_to_length(pool, options.keep, options.target_length);
  std::vector<std::size_t> unselected;
  {
    std::vector<bool> in(pool.size(), false);
    for (std::size_t i : selected) in[i] = true;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!in[i]) unselected.push_back(i);
    }
  }
  objective.reset(selected);
  double current = objective.mse();
  result.initial_mse = current;

  const std::size_t max_iters =
      options.max_iters > 0 ? options.max_iters : 10 * options.keep;
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> slots(selected.size());
  std::vector<std::size_t> others(unselected.size());

  // Relative margin keeps rounding noise from counting as progress.
  auto improves = [&](double candidate, double reference) {
    return candidate < reference - 1e-12 * reference;
  };
  auto accept = [&](std::size_t s, std::size_t u, double candidate) {
    objective.apply_swap(selected[s], unselected[u]);
    std::swap(selected[s], unselected[u]);
    current = candidate;
    result.trace.push_back(current);
  };

  bool improved = true;
  while (improved && result.trace.size() < max_iters) {
    improved = false;
    ++result.sweeps;
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    for (std::size_t i = 0; i < others.size(); ++i) others[i] = i;
    seeded_shuffle(slots, rng);
    seeded_shuffle(others, rng);
    if (options.moves == SwapPolicy::kBestImprovement) {
      // One swap per sweep: the best over all pairs, first in sweep order
      // on ties.
      double best = current;
      std::size_t best_s = 0, best_u = 0;
      for (std::size_t s : slots) {
        for (std::size_t u : others) {
          const double candidate = objective.mse_after_swap(selected[s], unselected[u]);
          if (candidate < best) {
            best = candidate;
            best_s = s;
            best_u = u;
          }
        }
      }
      if (improves(best, current)) {
        accept(best_s, best_u, best);
        improved = true;
      }
      continue;
    }
    for (std::size_t s : slots) {
      for (std::size_t u : others) {
        const double candidate = objective.mse_after_swap(selected[s], unselected[u]);
        if (improves(candidate, current)) {
          accept(s, u, candidate);
          improved = true;
          if (result.trace.size() >= max_iters) break;
        }
      }
      if (result.trace.size() >= max_iters) break;
    }
  }

  std::sort(selected.begin(), selected.end());
  result.final_mse = current;
  result.selected = selected;
  result.pool = pool.empty_copy();
  for (std::size_t i : selected) result.pool.add(pool.texts[i], pool.sources[i]);
  return result;
}

}  // namespace ngeval
