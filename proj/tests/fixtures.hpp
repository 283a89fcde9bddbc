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

// Scratch directories and a small synthetic benchmark shared by the harness
// tests and the acceptance suite.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ngeval/records.hpp"

namespace fixture {

namespace fs = std::filesystem;

inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("ngeval_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline void write(const fs::path& path, const std::string& data) {
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << data;
}

inline std::string slurp(const fs::path& path) { return ngeval::read_text_file(path); }

struct ToyBenchmark {
  fs::path root;
  fs::path questions;
  fs::path candidates;
  fs::path drops;
  fs::path rules;
  std::vector<std::string> question_ids;
};

// Three questions, 40 candidates each. Candidates are sentences drawn from a
// small per-question phrase bank so most of them share all their 5-grams and
// survive the rare-gram filter.
inline ToyBenchmark toy_benchmark(const fs::path& root, std::size_t per_question = 40) {
  struct Topic {
    const char* id;
    const char* subject;
    const char* question;
    std::vector<std::string> phrases;
    const char* rules;
  };
  const std::vector<Topic> topics = {
      {"super", "physics", "超伝導とは何ですか。",
       {"超伝導は低温で電気抵抗がゼロになる現象です。", "臨界温度以下で物質は完全反磁性を示します。",
        "この性質はマイスナー効果と呼ばれています。", "超伝導体は磁気浮上や医療機器に使われます。"},
       "\"温度\"\n\"抵抗\"\nANY(\"ゼロ\", \"0\")\n2\t\"磁\"\n"},
      {"clock", "math", "時計の長針と短針は一日に何回重なりますか。",
       {"長針と短針は一日に二十二回重なります。", "十二時間ごとに十一回重なる計算です。",
        "正午と真夜中には二本の針が一致します。", "およそ六十五分ごとに針は重なります。"},
       "\"二十二\"\nALL(\"長針\", \"短針\")\nNOT(\"二十三\")\n"},
      {"tea", "culture", "茶道について説明してください。",
       {"茶道は客をもてなす日本の伝統文化です。", "抹茶を点てる所作には決まりがあります。",
        "茶室では季節の花と掛け軸を飾ります。", "一期一会の心で一服の茶を味わいます。"},
       "\"抹茶\"\nANY(\"もてなし\", \"もてなす\")\n\"一期一会\"\n"},
  };
  ToyBenchmark b;
  b.root = root;
  b.questions = root / "questions.jsonl";
  b.candidates = root / "candidates.jsonl";
  b.drops = root / "drops";
  b.rules = root / "rules";

  std::mt19937_64 rng(2024);
  std::string questions, candidates;
  for (const auto& t : topics) {
    b.question_ids.push_back(t.id);
    questions += std::string(R"({"question_id":")") + t.id + R"(","subject":")" + t.subject +
                 R"(","question":")" + t.question +
                 R"(","sample_answer":")" + t.phrases[0] + t.phrases[1] + "\"}\n";
    for (std::size_t i = 0; i < per_question; ++i) {
      const std::size_t n = 3 + rng() % 3;
      std::string text;
      for (std::size_t k = 0; k < n; ++k) text += t.phrases[(i + k * (1 + rng() % 2)) % t.phrases.size()];
      ngeval::ResponseRecord r{t.id, "gen" + std::to_string(i % 4), text, std::nullopt, std::nullopt};
      candidates += ngeval::format_response_line(r) + "\n";
    }
    write(b.rules / (std::string(t.id) + ".rules"), t.rules);
  }
  // The clock question drops wrong counts.
  candidates += ngeval::format_response_line(
                    {"clock", "gen9", "長針と短針は一日に二十三回重なります。", std::nullopt, std::nullopt}) +
                "\n";
  write(b.drops / "clock.drop", "ANY(\"二十三\", \"十三回\")\n");
  write(b.questions, questions);
  write(b.candidates, candidates);
  return b;
}

}  // namespace fixture
