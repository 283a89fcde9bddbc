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

#include <stdexcept>
#include <string>

namespace ngeval {

// Base for everything the library throws on bad input or misuse.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a pure function (width out of range, bad threshold).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration: rule tables, rule weights, duplicate ids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Syntax error in a text document. Carries 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// An object used before it was ready, e.g. an uncalibrated reference set.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ngeval
