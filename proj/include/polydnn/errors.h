// Copyright 2026 The polydnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace polydnn {

// Error categories. The numeric values double as CLI exit codes.
enum class ErrorCode {
  kIo = 1,
  kValidation = 2,
  kExpansionTooLarge = 3,
  kFieldOverflow = 4,
  kFingerprintMismatch = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

// Malformed input files: bad schema, bad magic number, ragged rows.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error(ErrorCode::kValidation, message) {}
};

// Well-formed input that violates a structural invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCode::kValidation, message) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& message)
      : Error(ErrorCode::kValidation, message) {}
};

// Chebyshev to monomial conversion lost too much accuracy.
class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& message)
      : Error(ErrorCode::kValidation, message) {}
};

class ExpansionTooLargeError : public Error {
 public:
  explicit ExpansionTooLargeError(const std::string& message)
      : Error(ErrorCode::kExpansionTooLarge, message) {}
};

class FieldOverflowError : public Error {
 public:
  explicit FieldOverflowError(const std::string& message)
      : Error(ErrorCode::kFieldOverflow, message) {}
};

class FingerprintMismatchError : public Error {
 public:
  explicit FingerprintMismatchError(const std::string& message)
      : Error(ErrorCode::kFingerprintMismatch, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCode::kIo, message) {}
};

}  // namespace polydnn
