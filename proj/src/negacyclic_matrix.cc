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

#include "polymm/negacyclic_matrix.h"

#include <algorithm>
#include <utility>

#include "polymm/error.h"

namespace polymm {

NegacyclicMatrixZq build_matrix(const Polynomial& b) {
  const std::size_t n = b.size();
  const BigInt& q = b.params().q;
  std::vector<BigInt> entries(n * n);
  for (std::size_t c = 0; c < n; ++c) entries[c] = b[c];
  for (std::size_t r = 1; r < n; ++r) {
    const BigInt& wrapped = entries[(r - 1) * n + (n - 1)];
    entries[r * n] = wrapped == 0 ? BigInt(0) : BigInt(q - wrapped);
    for (std::size_t c = 1; c < n; ++c) entries[r * n + c] = entries[(r - 1) * n + (c - 1)];
  }
  return NegacyclicMatrixZq(b.params(), std::move(entries));
}

std::vector<Polynomial> batch_mul(std::span<const Polynomial> batch, const NegacyclicMatrixZq& m) {
  for (const Polynomial& a : batch) {
    if (!(a.params() == m.params())) {
      throw Error(ErrorCode::kParameterMismatch, "batch element does not match the matrix ring");
    }
  }
  const std::size_t n = m.n();
  const BigInt& q = m.params().q;
  std::vector<Polynomial> out;
  out.reserve(batch.size());
  const bool native = 2 * bit_length(q) + bit_length(BigInt(n)) <= 127;
  if (native) {
    const auto qn = static_cast<std::uint64_t>(q);
    std::vector<std::uint64_t> mat(n * n);
    for (std::size_t i = 0; i < n * n; ++i) mat[i] = static_cast<std::uint64_t>(m.at(i / n, i % n));
    std::vector<u128> acc(n);
    for (const Polynomial& a : batch) {
      std::fill(acc.begin(), acc.end(), u128{0});
      for (std::size_t r = 0; r < n; ++r) {
        const auto ar = static_cast<std::uint64_t>(a[r]);
        const std::uint64_t* mrow = &mat[r * n];
        for (std::size_t c = 0; c < n; ++c) acc[c] += static_cast<u128>(ar) * mrow[c];
      }
      std::vector<BigInt> coeffs(n);
      for (std::size_t c = 0; c < n; ++c) coeffs[c] = static_cast<std::uint64_t>(acc[c] % qn);
      out.emplace_back(m.params(), std::move(coeffs));
    }
    return out;
  }
  for (const Polynomial& a : batch) {
    std::vector<BigInt> acc(n, BigInt(0));
    for (std::size_t r = 0; r < n; ++r) {
      if (a[r] == 0) continue;
      for (std::size_t c = 0; c < n; ++c) acc[c] += a[r] * m.at(r, c);
    }
    for (auto& v : acc) v %= q;
    out.emplace_back(m.params(), std::move(acc));
  }
  return out;
}

Polynomial vec_mat_mul(const Polynomial& a, const NegacyclicMatrixZq& m) {
  if (!(a.params() == m.params())) {
    throw Error(ErrorCode::kParameterMismatch, "vector does not match the matrix ring");
  }
  return std::move(batch_mul(std::span<const Polynomial>(&a, 1), m).front());
}

BlockPlan make_block_plan(std::size_t n, std::size_t block_dim) {
  if (n >= 1 && block_dim == n) return BlockPlan{n, n, 1};
  if (!is_power_of_two(n) || !is_power_of_two(block_dim)) {
    throw Error(ErrorCode::kInvalidPlan, "n (" + std::to_string(n) + ") and block_dim (" +
                                             std::to_string(block_dim) +
                                             ") must both be powers of two");
  }
  if (block_dim > n) {
    throw Error(ErrorCode::kInvalidPlan, "block_dim " + std::to_string(block_dim) +
                                             " exceeds n " + std::to_string(n));
  }
  return BlockPlan{n, block_dim, n / block_dim};
}

TiledMatrix::TiledMatrix(const BlockPlan& plan, std::vector<std::uint32_t> data)
    : plan_(plan), data_(std::move(data)) {
  if (data_.size() != plan_.n * plan_.n) {
    throw Error(ErrorCode::kInternal, "tiled matrix storage does not match its plan");
  }
}

TiledMatrix TiledMatrix::from_dense(InputView full, const BlockPlan& plan) {
  if (full.rows != plan.n || full.cols != plan.n) {
    throw Error(ErrorCode::kParameterMismatch, "matrix shape does not match the block plan");
  }
  const std::size_t bd = plan.block_dim;
  std::vector<std::uint32_t> data(plan.n * plan.n);
  std::uint32_t* out = data.data();
  for (std::size_t bi = 0; bi < plan.grid; ++bi) {
    for (std::size_t bj = 0; bj < plan.grid; ++bj) {
      for (std::size_t r = 0; r < bd; ++r) {
        const std::uint32_t* src = full.row(bi * bd + r) + bj * bd;
        out = std::copy(src, src + bd, out);
      }
    }
  }
  return TiledMatrix(plan, std::move(data));
}

InputView TiledMatrix::tile(std::size_t block_row, std::size_t block_col) const {
  const std::size_t bd = plan_.block_dim;
  return InputView(data_.data() + (block_row * plan_.grid + block_col) * bd * bd, bd, bd, bd);
}

std::uint32_t TiledMatrix::at(std::size_t r, std::size_t c) const {
  const std::size_t bd = plan_.block_dim;
  return tile(r / bd, c / bd).at(r % bd, c % bd);
}

namespace {

void check_u64_accumulation(std::size_t n, const EngineConfig& cfg) {
  const u128 max_input = (static_cast<u128>(1) << cfg.input_bits) - 1;
  const u128 worst = static_cast<u128>(n) * max_input * max_input;
  if (worst > static_cast<u128>(~std::uint64_t{0})) {
    throw Error(ErrorCode::kEngineOverflow,
                "merged sums over n=" + std::to_string(n) + " with " +
                    std::to_string(cfg.input_bits) + "-bit inputs exceed 64 bits");
  }
}

void add_into(AccMatrix& dst, std::size_t col0, const AccMatrix& src) {
  for (std::size_t r = 0; r < src.rows; ++r) {
    std::uint64_t* d = &dst.at(r, col0);
    const std::uint64_t* s = &src.data[r * src.cols];
    for (std::size_t c = 0; c < src.cols; ++c) d[c] += s[c];
  }
}

}  // namespace

BlockedProduct blocked_matmul(InputView a, const BlockPlan& plan, const TileSource& tiles,
                              const MacEngine& engine) {
  if (a.cols != plan.n) {
    throw Error(ErrorCode::kParameterMismatch, "vector length " + std::to_string(a.cols) +
                                                   " does not match plan n " +
                                                   std::to_string(plan.n));
  }
  check_u64_accumulation(plan.n, engine.config());
  const std::size_t bd = plan.block_dim;
  BlockedProduct out{AccMatrix(a.rows, plan.n), EngineStats{}};
  for (std::size_t bj = 0; bj < plan.grid; ++bj) {
    for (std::size_t bi = 0; bi < plan.grid; ++bi) {
      MatmulResult part = engine.matmul(a.block(0, bi * bd, a.rows, bd), tiles(bi, bj));
      add_into(out.sums, bj * bd, part.product);
      out.stats += part.stats;
    }
  }
  return out;
}

BlockedProduct blocked_matmul(InputView a, const TiledMatrix& b, const MacEngine& engine) {
  return blocked_matmul(a, b.plan(),
                        [&b](std::size_t bi, std::size_t bj) { return b.tile(bi, bj); }, engine);
}

namespace {

std::uint32_t to_engine_word(const BigInt& v) {
  if (bit_length(v) > 32) {
    throw Error(ErrorCode::kOutOfRange, "coefficient does not fit a 32-bit engine word");
  }
  return static_cast<std::uint32_t>(v);
}

InputMatrix engine_matrix(const NegacyclicMatrixZq& m) {
  const std::size_t n = m.n();
  InputMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) = to_engine_word(m.at(r, c));
  }
  return out;
}

InputMatrix engine_row(const Polynomial& a) {
  InputMatrix out(1, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = to_engine_word(a[i]);
  return out;
}

Polynomial reduce_row(const AccMatrix& sums, const RingParams& params) {
  std::vector<BigInt> coeffs(params.n);
  for (std::size_t i = 0; i < params.n; ++i) coeffs[i] = BigInt(sums.data[i]) % params.q;
  return Polynomial(params, std::move(coeffs));
}

AccMatrix split_recursive(InputView v, InputView m, std::size_t leaf, const MacEngine& engine) {
  const std::size_t d = m.rows;
  if (d <= leaf) return engine.matmul(v, m).product;
  const std::size_t h = d / 2;
  const InputView v1 = v.block(0, 0, v.rows, h), v2 = v.block(0, h, v.rows, h);
  const AccMatrix r1a = split_recursive(v1, m.block(0, 0, h, h), leaf, engine);
  const AccMatrix r1b = split_recursive(v1, m.block(0, h, h, h), leaf, engine);
  const AccMatrix r2c = split_recursive(v2, m.block(h, 0, h, h), leaf, engine);
  const AccMatrix r2d = split_recursive(v2, m.block(h, h, h, h), leaf, engine);
  AccMatrix out(v.rows, d);
  add_into(out, 0, r1a);
  add_into(out, 0, r2c);
  add_into(out, h, r1b);
  add_into(out, h, r2d);
  return out;
}

}  // namespace

Polynomial blocked_vec_mat_mul(const Polynomial& a, const NegacyclicMatrixZq& m,
                               const BlockPlan& plan, const MacEngine& engine,
                               EngineStats* stats) {
  if (!(a.params() == m.params())) {
    throw Error(ErrorCode::kParameterMismatch, "vector does not match the matrix ring");
  }
  if (plan.n != m.n()) {
    throw Error(ErrorCode::kParameterMismatch, "plan n " + std::to_string(plan.n) +
                                                   " does not match ring n " +
                                                   std::to_string(m.n()));
  }
  const InputMatrix dense = engine_matrix(m);
  const TiledMatrix tiled = TiledMatrix::from_dense(dense, plan);
  const InputMatrix row = engine_row(a);
  BlockedProduct product = blocked_matmul(row, tiled, engine);
  if (stats != nullptr) *stats = product.stats;
  return reduce_row(product.sums, m.params());
}

Polynomial recursive_split_vec_mat_mul(const Polynomial& a, const NegacyclicMatrixZq& m,
                                       std::size_t leaf_dim, const MacEngine& engine) {
  if (!(a.params() == m.params())) {
    throw Error(ErrorCode::kParameterMismatch, "vector does not match the matrix ring");
  }
  if (!is_power_of_two(m.n()) || leaf_dim == 0) {
    throw Error(ErrorCode::kInvalidPlan, "recursive split needs power-of-two n and leaf_dim >= 1");
  }
  check_u64_accumulation(m.n(), engine.config());
  const InputMatrix dense = engine_matrix(m);
  const InputMatrix row = engine_row(a);
  return reduce_row(split_recursive(row, dense, leaf_dim, engine), m.params());
}

}  // namespace polymm
