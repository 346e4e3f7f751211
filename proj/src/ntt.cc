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

#include "polymm/ntt.h"

#include <algorithm>

#include "polymm/error.h"

namespace polymm {

namespace {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::size_t bit_reverse(std::size_t v, unsigned bits) {
  std::size_t r = 0;
  for (unsigned i = 0; i < bits; ++i) {
    r = (r << 1) | (v & 1);
    v >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime_u64(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (v % p == 0) return v == p;
  }
  std::uint64_t d = v - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = pow_mod(a, d, v);
    if (x == 1 || x == v - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mul_mod(x, x, v);
      if (x == v - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

NttContext make_context(const RingParams& ring) {
  const std::size_t n = ring.n;
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::kUnsupportedParameters, "NTT needs power-of-two n, got " + std::to_string(n));
  }
  if (bit_length(ring.q) > 62) {
    throw Error(ErrorCode::kUnsupportedParameters, "NTT modulus must be below 2^62");
  }
  const auto q = static_cast<std::uint64_t>(ring.q);
  if (!is_prime_u64(q)) {
    throw Error(ErrorCode::kUnsupportedParameters, "NTT modulus " + std::to_string(q) + " is not prime");
  }
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  if ((q - 1) % two_n != 0) {
    throw Error(ErrorCode::kUnsupportedParameters,
                "q = " + std::to_string(q) + " is not 1 mod 2n = " + std::to_string(two_n));
  }

  // psi^n == -1 pins the order of psi to exactly 2n because 2n is a power of two.
  std::uint64_t root = 0;
  for (std::uint64_t g = 2; g < q; ++g) {
    const std::uint64_t candidate = pow_mod(g, (q - 1) / two_n, q);
    if (pow_mod(candidate, n, q) == q - 1) {
      root = candidate;
      break;
    }
  }
  if (root == 0) throw Error(ErrorCode::kInternal, "no primitive 2n-th root found");
  std::uint64_t best = root;
  const std::uint64_t root_sq = mul_mod(root, root, q);
  std::uint64_t odd_power = root;
  for (std::size_t j = 1; j < n; ++j) {
    odd_power = mul_mod(odd_power, root_sq, q);
    best = std::min(best, odd_power);
  }

  NttContext ctx(ring);
  ctx.q_ = q;
  ctx.psi_ = best;
  ctx.psi_inv_ = pow_mod(best, q - 2, q);
  ctx.n_inv_ = pow_mod(n % q, q - 2, q);
  const unsigned log_n = log2_exact(n);
  ctx.psi_rev_.resize(n);
  ctx.psi_inv_rev_.resize(n);
  std::uint64_t p = 1, pi = 1;
  std::vector<std::uint64_t> powers(n), inv_powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    powers[i] = p;
    inv_powers[i] = pi;
    p = mul_mod(p, ctx.psi_, q);
    pi = mul_mod(pi, ctx.psi_inv_, q);
  }
  for (std::size_t i = 0; i < n; ++i) {
    ctx.psi_rev_[i] = powers[bit_reverse(i, log_n)];
    ctx.psi_inv_rev_[i] = inv_powers[bit_reverse(i, log_n)];
  }
  return ctx;
}

std::vector<std::uint64_t> forward_ntt(const Polynomial& a, const NttContext& ctx,
                                       NttCounters* counters) {
  if (!(a.params() == ctx.ring())) {
    throw Error(ErrorCode::kParameterMismatch, "polynomial ring does not match the NTT context");
  }
  const std::size_t n = a.size();
  const std::uint64_t q = ctx.modulus();
  const auto psi = ctx.psi_powers_bitrev();
  std::vector<std::uint64_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint64_t>(a[i]);
  std::uint64_t butterflies = 0;
  for (std::size_t m = 1, t = n; m < n; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const std::uint64_t s = psi[m + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const std::uint64_t u = v[j];
        const std::uint64_t w = mul_mod(v[j + t], s, q);
        v[j] = u + w >= q ? u + w - q : u + w;
        v[j + t] = u >= w ? u - w : u + q - w;
        ++butterflies;
      }
    }
  }
  if (counters != nullptr) counters->butterflies += butterflies;
  return v;
}

Polynomial inverse_ntt(std::span<const std::uint64_t> values, const NttContext& ctx,
                       NttCounters* counters) {
  const std::size_t n = ctx.ring().n;
  if (values.size() != n) {
    throw Error(ErrorCode::kParameterMismatch, "value vector length does not match the NTT context");
  }
  const std::uint64_t q = ctx.modulus();
  const auto psi_inv = ctx.psi_inv_powers_bitrev();
  std::vector<std::uint64_t> v(values.begin(), values.end());
  for (std::uint64_t x : v) {
    if (x >= q) throw Error(ErrorCode::kOutOfRange, "NTT value " + std::to_string(x) + " is not below q");
  }
  std::uint64_t butterflies = 0;
  for (std::size_t m = n, t = 1; m > 1; m >>= 1, t <<= 1) {
    const std::size_t h = m / 2;
    for (std::size_t i = 0, j1 = 0; i < h; ++i, j1 += 2 * t) {
      const std::uint64_t s = psi_inv[h + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const std::uint64_t u = v[j];
        const std::uint64_t w = v[j + t];
        v[j] = u + w >= q ? u + w - q : u + w;
        v[j + t] = mul_mod(u >= w ? u - w : u + q - w, s, q);
        ++butterflies;
      }
    }
  }
  if (counters != nullptr) counters->butterflies += butterflies;
  std::vector<BigInt> coeffs(n);
  for (std::size_t i = 0; i < n; ++i) coeffs[i] = mul_mod(v[i], ctx.n_inv(), q);
  return Polynomial(ctx.ring(), std::move(coeffs));
}

Polynomial ntt_mul(const Polynomial& a, const Polynomial& b, const NttContext& ctx,
                   NttCounters* counters) {
  require_same_params(a, b);
  auto va = forward_ntt(a, ctx, counters);
  const auto vb = forward_ntt(b, ctx, counters);
  for (std::size_t i = 0; i < va.size(); ++i) va[i] = mul_mod(va[i], vb[i], ctx.modulus());
  return inverse_ntt(va, ctx, counters);
}

}  // namespace polymm
