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

#include "polymm/bigint.h"

#include <cctype>

#include "polymm/error.h"

namespace polymm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParameterMismatch: return "parameter mismatch";
    case ErrorCode::kUnsupportedShape: return "unsupported shape";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kInvalidPlan: return "invalid plan";
    case ErrorCode::kBaseTooSmall: return "base too small";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kEngineOverflow: return "engine overflow";
    case ErrorCode::kConfiguration: return "configuration error";
    case ErrorCode::kUnsupportedParameters: return "unsupported parameters";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

BigInt parse_decimal(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  if (pos == text.size()) {
    throw Error(ErrorCode::kParse, "expected a decimal integer, got '" + std::string(text) + "'");
  }
  BigInt value = 0;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorCode::kParse, "expected a decimal integer, got '" + std::string(text) + "'");
    }
    value *= 10;
    value += c - '0';
  }
  return negative ? BigInt(-value) : value;
}

std::string to_decimal(const BigInt& value) { return value.str(); }

std::size_t bit_length(const BigInt& value) {
  if (value <= 0) return 0;
  return boost::multiprecision::msb(value) + 1;
}

BigInt isqrt(const BigInt& value) {
  if (value < 0) throw Error(ErrorCode::kInvalidArgument, "isqrt of a negative value");
  return boost::multiprecision::sqrt(value);
}

BigInt mod_floor(const BigInt& value, const BigInt& m) {
  BigInt r = value % m;
  if (r < 0) r += m;
  return r;
}

std::optional<std::uint64_t> to_u64(const BigInt& value) {
  if (value < 0 || bit_length(value) > 64) return std::nullopt;
  return static_cast<std::uint64_t>(value);
}

BigInt from_u128(u128 value) {
  BigInt hi = static_cast<std::uint64_t>(value >> 64);
  return (hi << 64) | BigInt(static_cast<std::uint64_t>(value));
}

}  // namespace polymm
