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

#ifndef HETEROSPEC_ERRORS_HPP_
#define HETEROSPEC_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heterospec {

// Every failure raised by the library carries one of these codes. The CLI
// maps them onto process exit codes and the machine-readable error record.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kTokenizationFailure,
  kUnknownContext,
  kInvalidDraft,
  kDegenerateResidual,
  kEmptyIntersectionMass,
  kRealignmentFailure,
  kPsiBudgetExceeded,
  kSearchBudgetExceeded,
  kMissingPsi,
  kInstanceTooLarge,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class TokenizationFailure : public Error {
 public:
  TokenizationFailure(std::string text, std::size_t position);

  const std::string& text() const noexcept { return text_; }
  // Byte offset at which no token matched.
  std::size_t position() const noexcept { return position_; }

 private:
  std::string text_;
  std::size_t position_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(ErrorCode code, const std::string& message,
                 std::size_t budget)
      : Error(code, message), budget_(budget) {}

  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t budget_;
};

}  // namespace heterospec

#endif  // HETEROSPEC_ERRORS_HPP_
