// Copyright 2026 The HierNAS Authors.
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

#ifndef HIERNAS_CORE_ERRORS_H_
#define HIERNAS_CORE_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace hiernas {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kInvalidGenotype,
  kDegenerateArchitecture,
  kEvaluationFailure,
  kNumericFailure,
  kSpatialUnderflow,
  kIncompatibleCheckpoint,
  kIo,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error(ErrorCode::kParse, message) {}
};

// One invariant violation, located by (level, motif, successor, predecessor).
// Coordinates that do not apply are 0.
struct Violation {
  std::string kind;
  int level = 0;
  int motif = 0;
  int succ = 0;
  int pred = 0;
  std::string detail;

  std::string to_string() const;
};

class InvalidGenotype : public Error {
 public:
  explicit InvalidGenotype(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class DegenerateArchitecture : public Error {
 public:
  explicit DegenerateArchitecture(const std::string& message)
      : Error(ErrorCode::kDegenerateArchitecture, message) {}
};

class EvaluationFailure : public Error {
 public:
  explicit EvaluationFailure(const std::string& message)
      : Error(ErrorCode::kEvaluationFailure, message) {}
};

class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& message)
      : Error(ErrorCode::kNumericFailure, message) {}
};

class SpatialUnderflow : public Error {
 public:
  explicit SpatialUnderflow(const std::string& message)
      : Error(ErrorCode::kSpatialUnderflow, message) {}
};

class IncompatibleCheckpoint : public Error {
 public:
  explicit IncompatibleCheckpoint(const std::string& message)
      : Error(ErrorCode::kIncompatibleCheckpoint, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCode::kIo, message) {}
};

}  // namespace hiernas

#endif  // HIERNAS_CORE_ERRORS_H_
