// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace portune {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable benchmark data. `line()` is 1-based and 0 when the
// failure is not tied to a particular input line.
class IngestError : public Error {
 public:
  explicit IngestError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A selection job violates a method's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured combination cap.
class EnumerationCapError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Scope, result and matrix do not agree with each other.
class ScopeError : public Error {
 public:
  using Error::Error;
};

// Dispatch was asked about an environment it has no table entry for.
class NoMappingError : public Error {
 public:
  using Error::Error;
};

}  // namespace portune
