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

#ifndef POLYMM_BIGINT_H_
#define POLYMM_BIGINT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace polymm {

using BigInt = boost::multiprecision::cpp_int;
using u128 = unsigned __int128;
using i128 = __int128;

// Parses a base-10 integer with optional leading '-'. Throws Error(kParse).
BigInt parse_decimal(std::string_view text);
std::string to_decimal(const BigInt& value);

// Number of significant bits; 0 for zero. Value must be nonnegative.
std::size_t bit_length(const BigInt& value);

// floor(sqrt(value)) for value >= 0.
BigInt isqrt(const BigInt& value);

// Nonnegative remainder in [0, m).
BigInt mod_floor(const BigInt& value, const BigInt& m);

std::optional<std::uint64_t> to_u64(const BigInt& value);
BigInt from_u128(u128 value);

constexpr bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr unsigned log2_exact(std::uint64_t v) {
  unsigned r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

}  // namespace polymm

#endif  // POLYMM_BIGINT_H_
