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

#include "polymm/ring.h"

#include <random>
#include <sstream>
#include <utility>

#include "polymm/error.h"

namespace polymm {

RingParams::RingParams(std::size_t n_in, BigInt q_in) : n(n_in), q(std::move(q_in)) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ring degree bound n must be >= 1");
  if (q < 2) throw Error(ErrorCode::kInvalidArgument, "ring modulus q must be >= 2");
}

Polynomial::Polynomial(RingParams params, std::vector<BigInt> coeffs)
    : params_(std::move(params)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != params_.n) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(params_.n) + " coefficients, got " +
                    std::to_string(coeffs_.size()));
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] < 0 || coeffs_[i] >= params_.q) {
      throw Error(ErrorCode::kInvalidArgument,
                  "coefficient " + std::to_string(i) + " is not in [0, q)");
    }
  }
}

Polynomial Polynomial::zero(const RingParams& params) {
  return Polynomial(params, std::vector<BigInt>(params.n, BigInt(0)));
}

Polynomial Polynomial::from_signed(const RingParams& params, std::vector<BigInt> values) {
  for (auto& v : values) v = mod_floor(v, params.q);
  return Polynomial(params, std::move(values));
}

Polynomial Polynomial::monomial(const RingParams& params, std::size_t degree, const BigInt& c) {
  if (degree >= params.n) {
    throw Error(ErrorCode::kInvalidArgument, "monomial degree must be < n");
  }
  std::vector<BigInt> values(params.n, BigInt(0));
  values[degree] = mod_floor(c, params.q);
  return Polynomial(params, std::move(values));
}

void require_same_params(const Polynomial& a, const Polynomial& b) {
  if (!(a.params() == b.params())) {
    throw Error(ErrorCode::kParameterMismatch,
                "operands live in different rings (n=" + std::to_string(a.params().n) +
                    ", q=" + to_decimal(a.params().q) + " vs n=" +
                    std::to_string(b.params().n) + ", q=" + to_decimal(b.params().q) + ")");
  }
}

Polynomial poly_add(const Polynomial& a, const Polynomial& b) {
  require_same_params(a, b);
  const BigInt& q = a.params().q;
  std::vector<BigInt> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] + b[i];
    if (out[i] >= q) out[i] -= q;
  }
  return Polynomial(a.params(), std::move(out));
}

Polynomial poly_sub(const Polynomial& a, const Polynomial& b) {
  require_same_params(a, b);
  const BigInt& q = a.params().q;
  std::vector<BigInt> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] - b[i];
    if (out[i] < 0) out[i] += q;
  }
  return Polynomial(a.params(), std::move(out));
}

namespace {

// True when n * (q-1)^2 is guaranteed to fit an unsigned 128-bit sum.
bool fits_u128_dot(std::size_t n, const BigInt& q) {
  return 2 * bit_length(q) + bit_length(BigInt(n)) <= 127;
}

Polynomial schoolbook_u128(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = a.size();
  const std::uint64_t q = static_cast<std::uint64_t>(a.params().q);
  std::vector<std::uint64_t> av(n), bv(n);
  for (std::size_t i = 0; i < n; ++i) {
    av[i] = static_cast<std::uint64_t>(a[i]);
    bv[i] = static_cast<std::uint64_t>(b[i]);
  }
  std::vector<BigInt> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    u128 pos = 0;
    u128 neg = 0;
    for (std::size_t i = 0; i <= k; ++i) pos += static_cast<u128>(av[i]) * bv[k - i];
    for (std::size_t i = k + 1; i < n; ++i) neg += static_cast<u128>(av[i]) * bv[n + k - i];
    const std::uint64_t p = static_cast<std::uint64_t>(pos % q);
    const std::uint64_t m = static_cast<std::uint64_t>(neg % q);
    out[k] = p >= m ? p - m : q - (m - p);
  }
  return Polynomial(a.params(), std::move(out));
}

Polynomial schoolbook_bigint(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = a.size();
  std::vector<BigInt> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    BigInt acc = 0;
    for (std::size_t i = 0; i <= k; ++i) acc += a[i] * b[k - i];
    for (std::size_t i = k + 1; i < n; ++i) acc -= a[i] * b[n + k - i];
    out[k] = mod_floor(acc, a.params().q);
  }
  return Polynomial(a.params(), std::move(out));
}

}  // namespace

Polynomial schoolbook_negacyclic_mul(const Polynomial& a, const Polynomial& b) {
  require_same_params(a, b);
  if (fits_u128_dot(a.size(), a.params().q)) return schoolbook_u128(a, b);
  return schoolbook_bigint(a, b);
}

namespace {

// Full (unreduced) product over Z[x]; f and g have equal power-of-two length.
template <typename Int>
class KaratsubaRecursion {
 public:
  KaratsubaRecursion(std::size_t threshold, KaratsubaStats& stats)
      : threshold_(threshold), stats_(stats) {}

  std::vector<Int> multiply(std::span<const Int> f, std::span<const Int> g, std::size_t depth) {
    const std::size_t s = f.size();
    if (depth > stats_.max_depth) stats_.max_depth = depth;
    std::vector<Int> out(2 * s - 1, Int(0));
    if (s <= threshold_) {
      ++stats_.base_multiplications;
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) out[i + j] += f[i] * g[j];
      }
      return out;
    }
    const std::size_t m = s / 2;
    auto f0 = f.first(m), f1 = f.subspan(m);
    auto g0 = g.first(m), g1 = g.subspan(m);
    std::vector<Int> fs(m), gs(m);
    for (std::size_t i = 0; i < m; ++i) {
      fs[i] = f0[i] + f1[i];
      gs[i] = g0[i] + g1[i];
    }
    const std::vector<Int> h0 = multiply(f0, g0, depth + 1);
    const std::vector<Int> h2 = multiply(f1, g1, depth + 1);
    std::vector<Int> h1 = multiply(fs, gs, depth + 1);
    for (std::size_t i = 0; i < h1.size(); ++i) h1[i] -= h0[i] + h2[i];
    for (std::size_t i = 0; i < h0.size(); ++i) {
      out[i] += h0[i];
      out[i + m] += h1[i];
      out[i + 2 * m] += h2[i];
    }
    return out;
  }

 private:
  std::size_t threshold_;
  KaratsubaStats& stats_;
};

template <typename Int>
std::vector<BigInt> karatsuba_wrapped(const Polynomial& a, const Polynomial& b,
                                      std::size_t threshold, KaratsubaStats& stats) {
  const std::size_t n = a.size();
  std::vector<Int> f(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<Int, BigInt>) {
      f[i] = a[i];
      g[i] = b[i];
    } else {
      f[i] = static_cast<Int>(static_cast<std::uint64_t>(a[i]));
      g[i] = static_cast<Int>(static_cast<std::uint64_t>(b[i]));
    }
  }
  KaratsubaRecursion<Int> rec(threshold, stats);
  const std::vector<Int> full = rec.multiply(f, g, 0);
  std::vector<BigInt> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Int c = full[k];
    if (k + n < full.size()) c -= full[k + n];
    if constexpr (std::is_same_v<Int, BigInt>) {
      out[k] = mod_floor(c, a.params().q);
    } else {
      const auto q = static_cast<Int>(static_cast<std::uint64_t>(a.params().q));
      Int r = c % q;
      if (r < 0) r += q;
      out[k] = static_cast<std::uint64_t>(r);
    }
  }
  return out;
}

}  // namespace

Polynomial karatsuba_negacyclic_mul(const Polynomial& a, const Polynomial& b,
                                    std::size_t threshold, KaratsubaStats* stats) {
  require_same_params(a, b);
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::kUnsupportedShape,
                "karatsuba requires power-of-two n, got " + std::to_string(n));
  }
  if (threshold == 0) throw Error(ErrorCode::kInvalidArgument, "karatsuba threshold must be >= 1");
  KaratsubaStats local;
  KaratsubaStats& st = stats != nullptr ? *stats : local;
  st = KaratsubaStats{};
  // Every intermediate is bounded by n^2 q^2 in magnitude.
  const std::size_t bits_needed = 2 * bit_length(a.params().q) + 2 * log2_exact(n) + 1;
  if (bits_needed <= 126) {
    return Polynomial(a.params(), karatsuba_wrapped<i128>(a, b, threshold, st));
  }
  return Polynomial(a.params(), karatsuba_wrapped<BigInt>(a, b, threshold, st));
}

Polynomial sample_polynomial(const RingParams& params, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const BigInt upper = params.q - 1;
  const std::size_t bits = bit_length(upper);
  const std::size_t words = (bits + 63) / 64;
  const std::size_t top_bits = bits - 64 * (words - 1);
  const std::uint64_t top_mask = top_bits == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << top_bits) - 1);
  std::vector<BigInt> coeffs(params.n);
  for (auto& c : coeffs) {
    while (true) {
      BigInt candidate = 0;
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t limb = gen();
        if (w + 1 == words) limb &= top_mask;
        candidate |= BigInt(limb) << (64 * w);
      }
      if (candidate < params.q) {
        c = std::move(candidate);
        break;
      }
    }
  }
  return Polynomial(params, std::move(coeffs));
}

Polynomial parse_polynomial(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) header.push_back(tok);
  }
  if (header.size() != 2) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no == 0 ? 1 : line_no) +
                                       ": expected header 'n q'");
  }
  const std::size_t header_line = line_no;
  BigInt n_big;
  BigInt q;
  try {
    n_big = parse_decimal(header[0]);
    q = parse_decimal(header[1]);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(header_line) + ": " + e.message());
  }
  if (n_big < 1 || bit_length(n_big) > 40) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(header_line) + ": n must be >= 1");
  }
  if (q < 2) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(header_line) + ": q must be >= 2");
  }
  const auto n = static_cast<std::size_t>(n_big);
  std::vector<BigInt> values;
  values.reserve(n);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) {
      if (values.size() == n) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                           std::to_string(n) + " coefficients, found more");
      }
      try {
        values.push_back(parse_decimal(tok));
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.message());
      }
    }
  }
  if (values.size() != n) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(n) + " coefficients, found " +
                                       std::to_string(values.size()));
  }
  return Polynomial::from_signed(RingParams(n, q), std::move(values));
}

std::string format_coefficients(const Polynomial& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i != 0) out += ' ';
    out += to_decimal(p[i]);
  }
  return out;
}

std::string format_polynomial(const Polynomial& p) {
  return std::to_string(p.params().n) + " " + to_decimal(p.params().q) + "\n" +
         format_coefficients(p) + "\n";
}

}  // namespace polymm
