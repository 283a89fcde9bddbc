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

// Per-question frequency index over character n-grams of reference answers.
//
// Grams are interned level by level: a w-gram is identified by the id of its
// (w-1)-gram prefix plus its last symbol, so every level is a flat hash from
// a packed 64-bit key to a dense id. A lookup of all widths starting at one
// position is a single walk that stops at the first unseen prefix.

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ngeval/text.hpp"

namespace ngeval {

using GramId = std::uint32_t;
inline constexpr GramId kNoGram = std::numeric_limits<GramId>::max();

// Width at which per-answer containment (document frequency) is recorded.
inline constexpr int kDocFrequencyWidth = 3;

class NGramTable {
 public:
  NGramTable() = default;

  // Indexes every gram of every answer (with sentinels) for w = 1..max_width.
  static NGramTable Build(std::span<const NormalizedText> answers,
                          int max_width = kMaxGramWidth);

  int max_width() const { return static_cast<int>(levels_.size()); }
  std::size_t doc_count() const { return doc_count_; }
  // Total gram occurrences at width w (0 for widths not indexed).
  std::uint64_t total(int w) const;
  // Number of distinct grams at width w.
  std::size_t distinct(int w) const;

  std::uint64_t count(const Gram& g) const;
  // count(g) / total(w); 0 when unseen or when total(w) is 0.
  double probability(const Gram& g) const;
  // Fraction of indexed answers containing g. Throws ArgumentError unless
  // g has width 3.
  double doc_frequency(const Gram& g) const;

  // Id-level access used by the scorers.
  GramId find(int w, GramId parent, char32_t symbol) const;
  GramId find(const Gram& g) const;
  std::uint64_t count(int w, GramId id) const { return level(w).count[id]; }
  double probability(int w, GramId id) const;
  double doc_frequency(GramId id3) const;
  Gram gram(int w, GramId id) const;

  // Calls f(w, id) for w = 1, 2, ... over the grams starting at seq[start],
  // stopping at max_w, the end of seq, or the first unseen gram.
  template <class F>
  void walk(std::u32string_view seq, std::size_t start, int max_w,
            F&& f) const {
    GramId id = kNoGram;
    const int limit = std::min<int>(
        {max_w, max_width(), static_cast<int>(seq.size() - start)});
    for (int w = 1; w <= limit; ++w) {
      id = find(w, id, seq[start + w - 1]);
      if (id == kNoGram) return;
      f(w, id);
    }
  }

  // Binary round trip. The header carries a format version and the digests
  // of the punctuation set and normalization table the answers were built
  // with; load() returns them through `stamp`.
  struct Stamp {
    std::uint64_t punctuation_digest = 0;
    std::uint64_t normalization_digest = 0;
    friend bool operator==(const Stamp&, const Stamp&) = default;
  };
  void save(std::ostream& out, const Stamp& stamp) const;
  static NGramTable load(std::istream& in, Stamp* stamp = nullptr);

  friend bool operator==(const NGramTable& a, const NGramTable& b);

 private:
  struct Level {
    std::unordered_map<std::uint64_t, GramId> index;
    std::vector<GramId> parent;
    std::vector<char32_t> symbol;
    std::vector<std::uint64_t> count;
    std::uint64_t total = 0;
  };

  static std::uint64_t key(GramId parent, char32_t symbol) {
    return (static_cast<std::uint64_t>(parent) << 21) | symbol;
  }
  GramId intern(int w, GramId parent, char32_t symbol);
  const Level& level(int w) const { return levels_[w - 1]; }

  std::vector<Level> levels_;
  std::vector<std::uint32_t> doc_counts_;  // per width-3 id
  std::size_t doc_count_ = 0;
};

NGramTable build_index(std::span<const NormalizedText> answers,
                       int max_width = kMaxGramWidth);
double gram_probability(const NGramTable& table, const Gram& g);
double doc_frequency(const NGramTable& table, const Gram& g);
std::uint64_t corpus_gram_count(const NGramTable& table, const Gram& g);

// A question's reference answers with their index and fluency normalizer.
struct ReferenceSet {
  std::string question_id;
  std::vector<NormalizedText> answers;
  NGramTable table;
  std::optional<double> fluency_normalizer;
};

}  // namespace ngeval
