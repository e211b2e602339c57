/*
 * Copyright 2026 The depstrat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace depstrat {

enum class ErrorCode {
  kMalformedVersion,
  kMalformedRange,
  kUnsupportedConstraint,
  kEmptyRange,
  kMissingFile,
  kSchemaMismatch,
  kUnknownPackage,
  kInsufficientDependents,
  kTooFewRows,
  kDegenerateCorpus,
  kSingleClassTruth,
  kInvalidArgument,
  kMalformedInput,
  kIo,
  kInternal,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedVersion: return "MalformedVersion";
    case ErrorCode::kMalformedRange: return "MalformedRange";
    case ErrorCode::kUnsupportedConstraint: return "UnsupportedConstraint";
    case ErrorCode::kEmptyRange: return "EmptyRange";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kUnknownPackage: return "UnknownPackage";
    case ErrorCode::kInsufficientDependents: return "InsufficientDependents";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kDegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::kSingleClassTruth: return "SingleClassTruth";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

// Errors caused by the caller's data or configuration, as opposed to bugs.
inline bool is_input_error(ErrorCode code) {
  return code != ErrorCode::kInternal && code != ErrorCode::kIo;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace depstrat
