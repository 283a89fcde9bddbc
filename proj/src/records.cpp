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

#include "ngeval/records.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ngeval/digest.hpp"
#include "ngeval/errors.hpp"

namespace ngeval {

using nlohmann::json;

namespace {

json parse_object(std::string_view line, int line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON record: ") + e.what(), line_no,
                     static_cast<int>(e.byte));
  }
  if (!j.is_object()) throw ParseError("record is not an object", line_no, 1);
  return j;
}

std::string required_string(const json& j, const char* key, int line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(std::string("missing string field '") + key + "'",
                     line_no, 1);
  }
  return it->get<std::string>();
}

std::uint64_t parse_digest(const std::string& hex, int line_no) {
  std::uint64_t value = 0;
  std::istringstream in(hex);
  if (hex.size() != 16 || !(in >> std::hex >> value)) {
    throw ParseError("bad digest '" + hex + "'", line_no, 1);
  }
  return value;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

std::vector<QuestionRecord> read_questions(std::istream& in) {
  std::vector<QuestionRecord> out;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = parse_object(line, line_no);
    QuestionRecord q;
    q.question_id = required_string(j, "question_id", line_no);
    q.subject = required_string(j, "subject", line_no);
    q.question = j.value("question", "");
    q.sample_answer = j.value("sample_answer", "");
    if (q.question_id.empty()) {
      throw ParseError("empty question_id", line_no, 1);
    }
    if (q.subject.empty()) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": question '" + q.question_id + "' has no subject");
    }
    if (!seen.insert(q.question_id).second) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": duplicate question_id '" + q.question_id + "'");
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QuestionRecord> read_questions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_questions(in);
}

ResponseRecord parse_response_line(std::string_view line, int line_no) {
  const json j = parse_object(line, line_no);
  ResponseRecord r;
  r.question_id = required_string(j, "question_id", line_no);
  if (r.question_id.empty()) throw ParseError("empty question_id", line_no, 1);
  r.model = required_string(j, "model", line_no);
  r.response = required_string(j, "response", line_no);
  if (auto it = j.find("temperature"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError("temperature is not a number", line_no, 1);
    r.temperature = it->get<double>();
  }
  if (auto it = j.find("trial"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError("trial is not an integer", line_no, 1);
    r.trial = it->get<long long>();
  }
  return r;
}

std::string format_response_line(const ResponseRecord& record) {
  json j;
  j["question_id"] = record.question_id;
  j["model"] = record.model;
  j["response"] = record.response;
  if (record.temperature) j["temperature"] = *record.temperature;
  if (record.trial) j["trial"] = *record.trial;
  return j.dump();
}

void for_each_response(std::istream& in, bool strict,
                       const std::function<void(ResponseRecord, int)>& sink,
                       const std::function<void(const std::string&)>& warn) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    ResponseRecord record;
    try {
      record = parse_response_line(line, line_no);
    } catch (const ParseError& e) {
      if (strict) throw;
      if (warn) warn(std::string("skipping record: ") + e.what());
      continue;
    }
    sink(std::move(record), line_no);
  }
}

void write_refset(std::ostream& out, const RefsetFile& refset) {
  json header;
  header["format"] = "ngeval-refset";
  header["version"] = 1;
  header["question_id"] = refset.question_id;
  header["count"] = refset.texts.size();
  header["normalization_digest"] = digest_hex(refset.normalization_digest);
  header["punctuation_digest"] = digest_hex(refset.punctuation_digest);
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < refset.texts.size(); ++i) {
    json rec;
    rec["text"] = refset.texts[i];
    rec["source"] = i < refset.sources.size() ? refset.sources[i] : "";
    out << rec.dump() << '\n';
  }
}

RefsetFile read_refset(std::istream& in) {
  RefsetFile refset;
  std::string line;
  int line_no = 0;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = parse_object(line, line_no);
    if (!have_header) {
      if (j.value("format", "") != "ngeval-refset") {
        throw ParseError("missing refset header", line_no, 1);
      }
      if (j.value("version", 0) != 1) {
        throw ParseError("unsupported refset version", line_no, 1);
      }
      refset.question_id = required_string(j, "question_id", line_no);
      refset.normalization_digest = parse_digest(
          required_string(j, "normalization_digest", line_no), line_no);
      refset.punctuation_digest = parse_digest(
          required_string(j, "punctuation_digest", line_no), line_no);
      expected = j.value("count", std::size_t{0});
      have_header = true;
      continue;
    }
    refset.texts.push_back(required_string(j, "text", line_no));
    refset.sources.push_back(j.value("source", ""));
  }
  if (!have_header) throw ParseError("empty refset file", line_no, 1);
  if (refset.texts.size() != expected) {
    throw ParseError("refset declares " + std::to_string(expected) +
                         " answers but holds " +
                         std::to_string(refset.texts.size()),
                     line_no, 1);
  }
  return refset;
}

RefsetFile read_refset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_refset(in);
  } catch (const ParseError& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ngeval
