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

#include "polymm/rns.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "polymm/error.h"

namespace polymm {

namespace {

std::uint64_t inverse_mod(std::uint64_t value, std::uint64_t m) {
  // Extended Euclid on signed 128-bit to avoid overflow for 32-bit moduli.
  i128 old_r = value % m, r = m;
  i128 old_s = 1, s = 0;
  while (r != 0) {
    const i128 quotient = old_r / r;
    std::tie(old_r, r) = std::pair<i128, i128>{r, old_r - quotient * r};
    std::tie(old_s, s) = std::pair<i128, i128>{s, old_s - quotient * s};
  }
  if (old_r != 1) throw Error(ErrorCode::kInternal, "value is not invertible modulo m");
  i128 inv = old_s % static_cast<i128>(m);
  if (inv < 0) inv += m;
  return static_cast<std::uint64_t>(inv);
}

u128 to_u128(const BigInt& v) {
  const BigInt mask64 = (BigInt(1) << 64) - 1;
  const auto lo = static_cast<std::uint64_t>(v & mask64);
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  return (static_cast<u128>(hi) << 64) | lo;
}

void check_word_bits(unsigned word_bits) {
  if (word_bits < 2 || word_bits > 32) {
    throw Error(ErrorCode::kInvalidArgument,
                "word_bits must be in [2, 32], got " + std::to_string(word_bits));
  }
}

// Walks candidates 2^word_bits - 1, 2^word_bits - 2, ..., 2 and accepts each
// one coprime to every accepted modulus. `done` is consulted after each
// acceptance.
template <typename Done>
std::vector<std::uint64_t> greedy_descent(unsigned word_bits, Done done) {
  std::vector<std::uint64_t> accepted;
  const std::uint64_t top = (std::uint64_t{1} << word_bits) - 1;
  for (std::uint64_t candidate = top; candidate >= 2; --candidate) {
    bool coprime = true;
    for (std::uint64_t m : accepted) {
      if (std::gcd(candidate, m) != 1) {
        coprime = false;
        break;
      }
    }
    if (!coprime) continue;
    accepted.push_back(candidate);
    if (done(accepted)) break;
  }
  return accepted;
}

}  // namespace

RnsBase::RnsBase(std::vector<std::uint64_t> moduli, unsigned word_bits)
    : moduli_(std::move(moduli)), word_bits_(word_bits) {
  check_word_bits(word_bits_);
  if (moduli_.empty()) throw Error(ErrorCode::kInvalidArgument, "RNS base needs at least one modulus");
  const std::uint64_t limit = std::uint64_t{1} << word_bits_;
  for (std::uint64_t m : moduli_) {
    if (m < 2 || m >= limit) {
      throw Error(ErrorCode::kInvalidArgument,
                  "modulus " + std::to_string(m) + " outside [2, 2^" +
                      std::to_string(word_bits_) + " - 1]");
    }
  }
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    for (std::size_t j = i + 1; j < moduli_.size(); ++j) {
      if (std::gcd(moduli_[i], moduli_[j]) != 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "moduli " + std::to_string(moduli_[i]) + " and " +
                        std::to_string(moduli_[j]) + " are not coprime");
      }
    }
  }

  product_ = 1;
  for (std::uint64_t m : moduli_) product_ *= m;
  punctured_.reserve(moduli_.size());
  inverses_.reserve(moduli_.size());
  weights_.reserve(moduli_.size());
  for (std::uint64_t m : moduli_) {
    BigInt mi = product_ / m;
    const auto mi_mod = static_cast<std::uint64_t>(mi % m);
    const std::uint64_t inv = m == 1 ? 0 : inverse_mod(mi_mod, m);
    weights_.push_back(mi * inv);
    punctured_.push_back(std::move(mi));
    inverses_.push_back(inv);
  }

  wide_ = bit_length(product_) <= 126;
  if (wide_) {
    product_wide_ = to_u128(product_);
    const auto m_ld = static_cast<long double>(product_);
    for (const BigInt& w : weights_) {
      weights_wide_.push_back(to_u128(w));
      weight_fraction_.push_back(static_cast<long double>(w) / m_ld);
    }
  }
}

std::uint64_t RnsBase::max_modulus() const {
  return *std::max_element(moduli_.begin(), moduli_.end());
}

u128 RnsBase::reconstruct_wide(std::span<const std::uint64_t> residues) const {
  // x = sum(r_i * w_i) - t * M with t = floor(sum(r_i * w_i / M)). The sum is
  // taken mod 2^128; since M < 2^126 a wrong estimate of t leaves a value
  // outside [0, M) whose magnitude tells the direction of the correction.
  u128 raw = 0;
  long double quotient = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    raw += static_cast<u128>(residues[i]) * weights_wide_[i];
    quotient += static_cast<long double>(residues[i]) * weight_fraction_[i];
  }
  const auto t = static_cast<u128>(std::floor(quotient));
  u128 x = raw - t * product_wide_;
  const u128 half = static_cast<u128>(1) << 127;
  while (x >= product_wide_) {
    if (x >= half) {
      x += product_wide_;
    } else {
      x -= product_wide_;
    }
  }
  return x;
}

RnsBase select_rns_base(const RnsSelectionParams& params) {
  check_word_bits(params.word_bits);
  if (params.accumulation_length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "accumulation length must be >= 1");
  }
  const BigInt bound = BigInt(params.accumulation_length) * params.q * params.q;
  BigInt product = 1;
  auto moduli = greedy_descent(params.word_bits, [&](const std::vector<std::uint64_t>& acc) {
    product *= acc.back();
    return product > bound;
  });
  if (!(product > bound)) {
    throw Error(ErrorCode::kBaseTooSmall,
                "all " + std::to_string(moduli.size()) + " coprime moduli below 2^" +
                    std::to_string(params.word_bits) + " multiply to " +
                    std::to_string(bit_length(product)) + " bits but the bound l*q^2 = " +
                    to_decimal(bound) + " needs " + std::to_string(bit_length(bound)) +
                    " bits (shortfall of about " +
                    std::to_string(bit_length(bound) - bit_length(product) + 1) + " bits)");
  }
  return RnsBase(std::move(moduli), params.word_bits);
}

RnsBase select_rns_base_with_count(std::size_t count, unsigned word_bits) {
  check_word_bits(word_bits);
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "RNS base size must be >= 1");
  auto moduli = greedy_descent(word_bits, [&](const std::vector<std::uint64_t>& acc) {
    return acc.size() == count;
  });
  if (moduli.size() < count) {
    throw Error(ErrorCode::kBaseTooSmall,
                "only " + std::to_string(moduli.size()) + " pairwise-coprime moduli exist below 2^" +
                    std::to_string(word_bits) + ", " + std::to_string(count) + " requested");
  }
  return RnsBase(std::move(moduli), word_bits);
}

std::vector<std::uint64_t> to_residues(const BigInt& x, const RnsBase& base) {
  if (x < 0 || x >= base.product()) {
    throw Error(ErrorCode::kOutOfRange, "value " + to_decimal(x) + " is outside [0, M)");
  }
  std::vector<std::uint64_t> out(base.size());
  if (bit_length(x) <= 128) {
    const u128 v = to_u128(x);
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = static_cast<std::uint64_t>(v % base.modulus(i));
  } else {
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = static_cast<std::uint64_t>(x % base.modulus(i));
  }
  return out;
}

namespace {

void check_residues(std::span<const std::uint64_t> residues, const RnsBase& base) {
  if (residues.size() != base.size()) {
    throw Error(ErrorCode::kParameterMismatch,
                "expected " + std::to_string(base.size()) + " residues, got " +
                    std::to_string(residues.size()));
  }
  for (std::size_t i = 0; i < residues.size(); ++i) {
    if (residues[i] >= base.modulus(i)) {
      throw Error(ErrorCode::kOutOfRange, "residue " + std::to_string(residues[i]) +
                                              " is not below modulus " +
                                              std::to_string(base.modulus(i)));
    }
  }
}

}  // namespace

BigInt crt_reconstruct_reference(std::span<const std::uint64_t> residues, const RnsBase& base) {
  check_residues(residues, base);
  BigInt acc = 0;
  for (std::size_t i = 0; i < base.size(); ++i) acc += base.crt_weight(i) * residues[i];
  return acc % base.product();
}

BigInt crt_reconstruct(std::span<const std::uint64_t> residues, const RnsBase& base) {
  check_residues(residues, base);
  if (base.has_wide_path()) return from_u128(base.reconstruct_wide(residues));
  BigInt acc = 0;
  for (std::size_t i = 0; i < base.size(); ++i) acc += base.crt_weight(i) * residues[i];
  return acc % base.product();
}

RnsCheckRecord rns_elementwise_check(const BigInt& x, const BigInt& y, const RnsBase& base) {
  RnsCheckRecord record;
  record.expected = x * y;
  record.overflow = record.expected >= base.product();
  const BigInt& m = base.product();
  const auto rx = to_residues(mod_floor(x, m), base);
  const auto ry = to_residues(mod_floor(y, m), base);
  std::vector<std::uint64_t> rz(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    rz[i] = static_cast<std::uint64_t>(static_cast<u128>(rx[i]) * ry[i] % base.modulus(i));
  }
  record.reconstructed = crt_reconstruct(rz, base);
  record.matches = record.reconstructed == record.expected;
  return record;
}

std::string format_moduli(const RnsBase& base) {
  std::string out = "[";
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (i != 0) out += ", ";
    out += std::to_string(base.modulus(i));
  }
  return out + "]";
}

}  // namespace polymm
