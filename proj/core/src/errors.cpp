// Copyright 2026 The heterospec Authors.
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

#include "heterospec/errors.hpp"

namespace heterospec {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kTokenizationFailure: return "TokenizationFailure";
    case ErrorCode::kUnknownContext: return "UnknownContext";
    case ErrorCode::kInvalidDraft: return "InvalidDraft";
    case ErrorCode::kDegenerateResidual: return "DegenerateResidual";
    case ErrorCode::kEmptyIntersectionMass: return "EmptyIntersectionMass";
    case ErrorCode::kRealignmentFailure: return "RealignmentFailure";
    case ErrorCode::kPsiBudgetExceeded: return "PsiBudgetExceeded";
    case ErrorCode::kSearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorCode::kMissingPsi: return "MissingPsi";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
  }
  return "Unknown";
}

TokenizationFailure::TokenizationFailure(std::string text, std::size_t position)
    : Error(ErrorCode::kTokenizationFailure,
            "no token matches at byte " + std::to_string(position) + " of \"" +
                text + "\""),
      text_(std::move(text)),
      position_(position) {}

}  // namespace heterospec
