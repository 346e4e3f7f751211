// Copyright 2026 The polymm Authors.
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

#ifndef POLYMM_ERROR_H_
#define POLYMM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace polymm {

enum class ErrorCode {
  kParameterMismatch,
  kUnsupportedShape,
  kInvalidArgument,
  kInvalidPlan,
  kBaseTooSmall,
  kOutOfRange,
  kEngineOverflow,
  kConfiguration,
  kUnsupportedParameters,
  kParse,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported as polymm::Error; code() tells callers
// which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the error-code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace polymm

#endif  // POLYMM_ERROR_H_
