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

#ifndef POLYMM_RNS_H_
#define POLYMM_RNS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polymm/bigint.h"

namespace polymm {

// Ordered pairwise-coprime moduli, each below 2^word_bits, with the constants
// needed for direct-formula CRT. Products and constants are always derived
// from the moduli list, never supplied by the caller.
class RnsBase {
 public:
  // Validates range and pairwise coprimality. word_bits in [2, 32].
  RnsBase(std::vector<std::uint64_t> moduli, unsigned word_bits);

  std::span<const std::uint64_t> moduli() const { return moduli_; }
  std::uint64_t modulus(std::size_t i) const { return moduli_[i]; }
  std::size_t size() const { return moduli_.size(); }
  unsigned word_bits() const { return word_bits_; }
  std::uint64_t max_modulus() const;
  const BigInt& product() const { return product_; }

  // M_i = M / m_i and M_i^{-1} mod m_i.
  const BigInt& punctured_product(std::size_t i) const { return punctured_[i]; }
  std::uint64_t punctured_inverse(std::size_t i) const { return inverses_[i]; }
  // M_i * (M_i^{-1} mod m_i); the weight of residue i in the CRT sum.
  const BigInt& crt_weight(std::size_t i) const { return weights_[i]; }

  // True when M < 2^126 and the native 128-bit reconstruction applies.
  bool has_wide_path() const { return wide_; }
  // CRT through 128-bit wrapping arithmetic; requires has_wide_path().
  u128 reconstruct_wide(std::span<const std::uint64_t> residues) const;

  friend bool operator==(const RnsBase& a, const RnsBase& b) {
    return a.moduli_ == b.moduli_ && a.word_bits_ == b.word_bits_;
  }

 private:
  std::vector<std::uint64_t> moduli_;
  unsigned word_bits_;
  BigInt product_;
  std::vector<BigInt> punctured_;
  std::vector<std::uint64_t> inverses_;
  std::vector<BigInt> weights_;

  bool wide_ = false;
  u128 product_wide_ = 0;
  std::vector<u128> weights_wide_;
  std::vector<long double> weight_fraction_;  // weight_i / M
};

struct RnsSelectionParams {
  BigInt q;
  std::size_t accumulation_length = 1;  // number of products summed per dot product
  unsigned word_bits = 8;
};

// Greedy descent from 2^word_bits - 1: a candidate is accepted iff it is
// coprime to everything accepted so far; stops as soon as the product exceeds
// accumulation_length * q^2. Throws kBaseTooSmall when the candidates run out.
RnsBase select_rns_base(const RnsSelectionParams& params);

// The first `count` moduli of the same greedy descent, ignoring any bound.
RnsBase select_rns_base_with_count(std::size_t count, unsigned word_bits);

// Throws kOutOfRange unless 0 <= x < M.
std::vector<std::uint64_t> to_residues(const BigInt& x, const RnsBase& base);

// Unique x in [0, M) with x = residues[i] (mod m_i). Throws kOutOfRange for a
// residue >= its modulus.
BigInt crt_reconstruct(std::span<const std::uint64_t> residues, const RnsBase& base);
// Same contract, always via BigInt sum(r_i * weight_i) mod M.
BigInt crt_reconstruct_reference(std::span<const std::uint64_t> residues, const RnsBase& base);

struct RnsCheckRecord {
  BigInt expected;       // x * y
  BigInt reconstructed;  // CRT of per-residue products
  bool overflow = false;  // x * y >= M; reconstructed is then x*y mod M
  bool matches = false;
};

// Multiplies residue-wise and reconstructs. A product >= M is reported via the
// overflow flag rather than thrown.
RnsCheckRecord rns_elementwise_check(const BigInt& x, const BigInt& y, const RnsBase& base);

std::string format_moduli(const RnsBase& base);

}  // namespace polymm

#endif  // POLYMM_RNS_H_
