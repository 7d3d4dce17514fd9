// Copyright 2026 The fisher-shadow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fshadow {

enum class ErrorCode {
  kDimensionMismatch,
  kGramSingular,
  kSingularC2,
  kSingularOutcome,
  kSupportViolation,
  kSingularFrame,
  kUnsupportedDim,
  kInvalidTree,
  kBudgetExhausted,
  kSingularFim,
  kCountMismatch,
  kInvalidAlpha,
  kCoarseFailure,
  kInvalidArgument,
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

/// Library-wide exception. Every failure mode named by the public API maps to
/// one ErrorCode so callers (and the CLI) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kGramSingular: return "GramSingular";
    case ErrorCode::kSingularC2: return "SingularC2";
    case ErrorCode::kSingularOutcome: return "SingularOutcome";
    case ErrorCode::kSupportViolation: return "SupportViolation";
    case ErrorCode::kSingularFrame: return "SingularFrame";
    case ErrorCode::kUnsupportedDim: return "UnsupportedDim";
    case ErrorCode::kInvalidTree: return "InvalidTree";
    case ErrorCode::kBudgetExhausted: return "BudgetExhausted";
    case ErrorCode::kSingularFim: return "SingularFim";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kCoarseFailure: return "CoarseFailure";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace fshadow
