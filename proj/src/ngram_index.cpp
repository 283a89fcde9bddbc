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

#include "ngeval/ngram_index.hpp"

#include <istream>
#include <ostream>

#include "ngeval/errors.hpp"

namespace ngeval {

namespace {

constexpr char kMagic[8] = {'N', 'G', 'E', 'V', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(
        (static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof bytes)) {
    throw Error("truncated n-gram index");
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return static_cast<T>(value);
}

}  // namespace

GramId NGramTable::intern(int w, GramId parent, char32_t symbol) {
  Level& lv = levels_[w - 1];
  auto [it, inserted] =
      lv.index.try_emplace(key(parent, symbol), static_cast<GramId>(lv.count.size()));
  if (inserted) {
    lv.parent.push_back(parent);
    lv.symbol.push_back(symbol);
    lv.count.push_back(0);
  }
  return it->second;
}

NGramTable NGramTable::Build(std::span<const NormalizedText> answers,
                             int max_width) {
  if (max_width < 1 || max_width > kMaxGramWidth) {
    throw ArgumentError("index width must be in 1.." +
                        std::to_string(kMaxGramWidth));
  }
  NGramTable table;
  table.levels_.resize(max_width);
  table.doc_count_ = answers.size();

  std::vector<GramId> seen3;
  for (const NormalizedText& answer : answers) {
    const std::u32string seq = with_sentinels(answer);
    seen3.clear();
    for (std::size_t start = 0; start < seq.size(); ++start) {
      const int limit =
          std::min<int>(max_width, static_cast<int>(seq.size() - start));
      GramId id = kNoGram;
      for (int w = 1; w <= limit; ++w) {
        id = table.intern(w, id, seq[start + w - 1]);
        Level& lv = table.levels_[w - 1];
        ++lv.count[id];
        ++lv.total;
        if (w == kDocFrequencyWidth) seen3.push_back(id);
      }
    }
    if (max_width >= kDocFrequencyWidth) {
      std::sort(seen3.begin(), seen3.end());
      seen3.erase(std::unique(seen3.begin(), seen3.end()), seen3.end());
      table.doc_counts_.resize(table.levels_[kDocFrequencyWidth - 1].count.size());
      for (GramId id : seen3) ++table.doc_counts_[id];
    }
  }
  return table;
}

std::uint64_t NGramTable::total(int w) const {
  if (w < 1 || w > max_width()) return 0;
  return level(w).total;
}

std::size_t NGramTable::distinct(int w) const {
  if (w < 1 || w > max_width()) return 0;
  return level(w).count.size();
}

GramId NGramTable::find(int w, GramId parent, char32_t symbol) const {
  if (w < 1 || w > max_width()) return kNoGram;
  if (w > 1 && parent == kNoGram) return kNoGram;
  const Level& lv = level(w);
  auto it = lv.index.find(key(parent, symbol));
  return it == lv.index.end() ? kNoGram : it->second;
}

GramId NGramTable::find(const Gram& g) const {
  if (g.width() < 1 || g.width() > max_width()) return kNoGram;
  GramId id = kNoGram;
  for (int w = 1; w <= g.width(); ++w) {
    id = find(w, id, g.symbols[w - 1]);
    if (id == kNoGram) return kNoGram;
  }
  return id;
}

std::uint64_t NGramTable::count(const Gram& g) const {
  const GramId id = find(g);
  return id == kNoGram ? 0 : count(g.width(), id);
}

double NGramTable::probability(int w, GramId id) const {
  const Level& lv = level(w);
  if (lv.total == 0) return 0.0;
  return static_cast<double>(lv.count[id]) / static_cast<double>(lv.total);
}

double NGramTable::probability(const Gram& g) const {
  const GramId id = find(g);
  return id == kNoGram ? 0.0 : probability(g.width(), id);
}

double NGramTable::doc_frequency(GramId id3) const {
  if (doc_count_ == 0) return 0.0;
  return static_cast<double>(doc_counts_[id3]) /
         static_cast<double>(doc_count_);
}

double NGramTable::doc_frequency(const Gram& g) const {
  if (g.width() != kDocFrequencyWidth) {
    throw ArgumentError("document frequency is only indexed for width " +
                        std::to_string(kDocFrequencyWidth) + ", got " +
                        std::to_string(g.width()));
  }
  const GramId id = find(g);
  return id == kNoGram ? 0.0 : doc_frequency(id);
}

Gram NGramTable::gram(int w, GramId id) const {
  std::u32string symbols(static_cast<std::size_t>(w), U'\0');
  for (int k = w; k >= 1; --k) {
    symbols[k - 1] = level(k).symbol[id];
    id = level(k).parent[id];
  }
  return Gram{std::move(symbols)};
}

void NGramTable::save(std::ostream& out, const Stamp& stamp) const {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, stamp.punctuation_digest);
  put<std::uint64_t>(out, stamp.normalization_digest);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(max_width()));
  put<std::uint64_t>(out, doc_count_);
  for (const Level& lv : levels_) {
    put<std::uint64_t>(out, lv.count.size());
    put<std::uint64_t>(out, lv.total);
    for (std::size_t i = 0; i < lv.count.size(); ++i) {
      put<std::uint32_t>(out, lv.parent[i]);
      put<std::uint32_t>(out, lv.symbol[i]);
      put<std::uint64_t>(out, lv.count[i]);
    }
  }
  put<std::uint64_t>(out, doc_counts_.size());
  for (std::uint32_t d : doc_counts_) put<std::uint32_t>(out, d);
  if (!out) throw Error("failed writing n-gram index");
}

NGramTable NGramTable::load(std::istream& in, Stamp* stamp) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) ||
      !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw Error("not an n-gram index file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw Error("unsupported n-gram index version " + std::to_string(version));
  }
  Stamp s;
  s.punctuation_digest = get<std::uint64_t>(in);
  s.normalization_digest = get<std::uint64_t>(in);
  if (stamp) *stamp = s;

  NGramTable table;
  const auto max_width = get<std::uint32_t>(in);
  if (max_width > static_cast<std::uint32_t>(kMaxGramWidth)) {
    throw Error("corrupt n-gram index: width " + std::to_string(max_width));
  }
  table.doc_count_ = get<std::uint64_t>(in);
  table.levels_.resize(max_width);
  for (std::uint32_t w = 1; w <= max_width; ++w) {
    Level& lv = table.levels_[w - 1];
    const auto n = get<std::uint64_t>(in);
    lv.total = get<std::uint64_t>(in);
    lv.parent.reserve(n);
    lv.symbol.reserve(n);
    lv.count.reserve(n);
    lv.index.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto parent = get<std::uint32_t>(in);
      const auto symbol = get<std::uint32_t>(in);
      const auto count = get<std::uint64_t>(in);
      if (w > 1 && parent >= table.levels_[w - 2].count.size()) {
        throw Error("corrupt n-gram index: dangling parent");
      }
      lv.parent.push_back(parent);
      lv.symbol.push_back(symbol);
      lv.count.push_back(count);
      lv.index.emplace(key(parent, symbol), static_cast<GramId>(i));
    }
  }
  const auto n_docs = get<std::uint64_t>(in);
  table.doc_counts_.reserve(n_docs);
  for (std::uint64_t i = 0; i < n_docs; ++i) {
    table.doc_counts_.push_back(get<std::uint32_t>(in));
  }
  return table;
}

bool operator==(const NGramTable& a, const NGramTable& b) {
  if (a.doc_count_ != b.doc_count_ || a.levels_.size() != b.levels_.size() ||
      a.doc_counts_ != b.doc_counts_) {
    return false;
  }
  for (std::size_t w = 0; w < a.levels_.size(); ++w) {
    const auto& x = a.levels_[w];
    const auto& y = b.levels_[w];
    if (x.total != y.total || x.parent != y.parent || x.symbol != y.symbol ||
        x.count != y.count) {
      return false;
    }
  }
  return true;
}

NGramTable build_index(std::span<const NormalizedText> answers, int max_width) {
  return NGramTable::Build(answers, max_width);
}

double gram_probability(const NGramTable& table, const Gram& g) {
  return table.probability(g);
}

double doc_frequency(const NGramTable& table, const Gram& g) {
  return table.doc_frequency(g);
}

std::uint64_t corpus_gram_count(const NGramTable& table, const Gram& g) {
  return table.count(g);
}

}  // namespace ngeval
