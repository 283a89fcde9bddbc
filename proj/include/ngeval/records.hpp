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

// Line-delimited JSON record formats read and written by the harness.
//
//   questions:  {"question_id", "subject", "question", "sample_answer"}
//   responses:  {"question_id", "model", "response",
//                optional "temperature", optional "trial"}
//   <id>.refset: a header record
//                {"format": "ngeval-refset", "version": 1, "question_id",
//                 "count", "normalization_digest", "punctuation_digest"}
//                followed by `count` records {"text", "source"}.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ngeval {

struct QuestionRecord {
  std::string question_id;
  std::string subject;
  std::string question;
  std::string sample_answer;
};

struct ResponseRecord {
  std::string question_id;
  std::string model;
  std::string response;
  std::optional<double> temperature;
  std::optional<long long> trial;
};

// Throws ParseError for malformed lines and ConfigError for duplicate ids or
// empty subjects.
std::vector<QuestionRecord> read_questions(std::istream& in);
std::vector<QuestionRecord> read_questions(const std::filesystem::path& path);

// Throws ParseError naming `line_no` when a required field is missing or
// has the wrong type.
ResponseRecord parse_response_line(std::string_view line, int line_no);
std::string format_response_line(const ResponseRecord& record);

// Streams response records. Malformed lines abort with ParseError when
// `strict`; otherwise they are skipped and reported through `warn`.
// Blank lines are ignored.
void for_each_response(std::istream& in, bool strict,
                       const std::function<void(ResponseRecord, int)>& sink,
                       const std::function<void(const std::string&)>& warn);

struct RefsetFile {
  std::string question_id;
  std::uint64_t normalization_digest = 0;
  std::uint64_t punctuation_digest = 0;
  std::vector<std::string> texts;
  std::vector<std::string> sources;
};

void write_refset(std::ostream& out, const RefsetFile& refset);
RefsetFile read_refset(std::istream& in);
RefsetFile read_refset(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view data);

}  // namespace ngeval
