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

#ifndef POLYMM_NTT_H_
#define POLYMM_NTT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polymm/ring.h"

namespace polymm {

// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime_u64(std::uint64_t v);

// Negacyclic NTT over prime q < 2^62 with q = 1 (mod 2n), n a power of two.
class NttContext {
 public:
  const RingParams& ring() const { return ring_; }
  std::uint64_t modulus() const { return q_; }
  // Smallest primitive 2n-th root of unity mod q.
  std::uint64_t psi() const { return psi_; }
  std::uint64_t psi_inv() const { return psi_inv_; }
  std::uint64_t n_inv() const { return n_inv_; }
  // psi^bitrev(i) and psi^-bitrev(i), i in [0, n).
  std::span<const std::uint64_t> psi_powers_bitrev() const { return psi_rev_; }
  std::span<const std::uint64_t> psi_inv_powers_bitrev() const { return psi_inv_rev_; }

 private:
  friend NttContext make_context(const RingParams& ring);
  explicit NttContext(RingParams ring) : ring_(std::move(ring)) {}

  RingParams ring_;
  std::uint64_t q_ = 0;
  std::uint64_t psi_ = 0;
  std::uint64_t psi_inv_ = 0;
  std::uint64_t n_inv_ = 0;
  std::vector<std::uint64_t> psi_rev_;
  std::vector<std::uint64_t> psi_inv_rev_;
};

// Throws kUnsupportedParameters when q is not an NTT-friendly prime for n.
// The root is found as g^((q-1)/2n) for g = 2, 3, ... and then replaced by
// the smallest odd power of itself, so the choice does not depend on g.
NttContext make_context(const RingParams& ring);

struct NttCounters {
  std::uint64_t butterflies = 0;
};

// psi-twisted Cooley-Tukey, natural-order input, bit-reversed-order output.
std::vector<std::uint64_t> forward_ntt(const Polynomial& a, const NttContext& ctx,
                                       NttCounters* counters = nullptr);
// Gentleman-Sande inverse of forward_ntt, including the 1/n scaling.
Polynomial inverse_ntt(std::span<const std::uint64_t> values, const NttContext& ctx,
                       NttCounters* counters = nullptr);

Polynomial ntt_mul(const Polynomial& a, const Polynomial& b, const NttContext& ctx,
                   NttCounters* counters = nullptr);

}  // namespace polymm

#endif  // POLYMM_NTT_H_
