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

#ifndef POLYMM_RING_H_
#define POLYMM_RING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polymm/bigint.h"

namespace polymm {

// The ring Z_q[x]/(x^n + 1). n is the number of coefficients; q need not be
// prime. Power-of-two n is only required by the algorithms that need it.
struct RingParams {
  std::size_t n = 0;
  BigInt q;

  RingParams(std::size_t n, BigInt q);

  friend bool operator==(const RingParams&, const RingParams&) = default;
};

// Coefficient vector with every entry in [0, q). Immutable once built.
class Polynomial {
 public:
  // Throws kInvalidArgument unless coeffs has exactly n canonical entries.
  Polynomial(RingParams params, std::vector<BigInt> coeffs);

  static Polynomial zero(const RingParams& params);
  // Reduces arbitrary (possibly negative) integers into [0, q).
  static Polynomial from_signed(const RingParams& params, std::vector<BigInt> values);
  // c * x^degree, degree < n.
  static Polynomial monomial(const RingParams& params, std::size_t degree, const BigInt& c = 1);

  const RingParams& params() const { return params_; }
  std::size_t size() const { return coeffs_.size(); }
  const BigInt& operator[](std::size_t i) const { return coeffs_[i]; }
  std::span<const BigInt> coeffs() const { return coeffs_; }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  RingParams params_;
  std::vector<BigInt> coeffs_;
};

inline constexpr std::size_t kDefaultKaratsubaThreshold = 32;

struct KaratsubaStats {
  // Number of schoolbook products at the leaves of the recursion.
  std::size_t base_multiplications = 0;
  std::size_t max_depth = 0;
};

Polynomial poly_add(const Polynomial& a, const Polynomial& b);
Polynomial poly_sub(const Polynomial& a, const Polynomial& b);

// Ground-truth O(n^2) negacyclic product:
//   c_k = sum_{i+j=k} a_i b_j - sum_{i+j=k+n} a_i b_j  (mod q).
Polynomial schoolbook_negacyclic_mul(const Polynomial& a, const Polynomial& b);

// Karatsuba over Z[x] with split point n/2, one final x^n = -1 wrap and a
// single reduction mod q. Sizes at or below `threshold` use schoolbook.
Polynomial karatsuba_negacyclic_mul(const Polynomial& a, const Polynomial& b,
                                    std::size_t threshold = kDefaultKaratsubaThreshold,
                                    KaratsubaStats* stats = nullptr);

// Uniform coefficients in [0, q) drawn from std::mt19937_64 seeded with
// `seed`. Each coefficient consumes ceil(bits(q-1)/64) 64-bit words
// (little-endian limbs, top limb masked) and is rejected and redrawn when the
// candidate is >= q. The mt19937_64 sequence is fixed by the C++ standard, so
// output is identical across platforms.
Polynomial sample_polynomial(const RingParams& params, std::uint64_t seed);

// Text format: first line "n q", then n whitespace-separated decimal
// coefficients (any integer, reduced mod q). Throws kParse with a line number.
Polynomial parse_polynomial(std::string_view text);
std::string format_polynomial(const Polynomial& p);
// Coefficients only, single space separated.
std::string format_coefficients(const Polynomial& p);

void require_same_params(const Polynomial& a, const Polynomial& b);

}  // namespace polymm

#endif  // POLYMM_RING_H_
