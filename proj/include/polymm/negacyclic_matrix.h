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

#ifndef POLYMM_NEGACYCLIC_MATRIX_H_
#define POLYMM_NEGACYCLIC_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "polymm/bigint.h"
#include "polymm/mac_engine.h"
#include "polymm/ring.h"

namespace polymm {

// The n x n operand matrix of b in Z_q[x]/(x^n+1): row 0 is b, and each later
// row is the previous one shifted right by one with the wrapped entry negated
// (stored as its mod-q complement, so every entry is in [0, q)). Then
// a * M == a(x) b(x) mod (x^n + 1) for the coefficient row vector a.
class NegacyclicMatrixZq {
 public:
  const RingParams& params() const { return params_; }
  std::size_t n() const { return params_.n; }
  const BigInt& at(std::size_t r, std::size_t c) const { return entries_[r * params_.n + c]; }
  std::span<const BigInt> row(std::size_t r) const {
    return std::span<const BigInt>(entries_).subspan(r * params_.n, params_.n);
  }

 private:
  friend NegacyclicMatrixZq build_matrix(const Polynomial& b);
  NegacyclicMatrixZq(RingParams params, std::vector<BigInt> entries)
      : params_(std::move(params)), entries_(std::move(entries)) {}

  RingParams params_;
  std::vector<BigInt> entries_;
};

NegacyclicMatrixZq build_matrix(const Polynomial& b);

// Exact integer dot products reduced mod q.
Polynomial vec_mat_mul(const Polynomial& a, const NegacyclicMatrixZq& m);

// Stacks the batch as rows of one matrix and multiplies once. An empty batch
// yields an empty result.
std::vector<Polynomial> batch_mul(std::span<const Polynomial> batch, const NegacyclicMatrixZq& m);

// Uniform k x k grid over an n x n matrix (and k segments of the vector).
struct BlockPlan {
  std::size_t n = 0;
  std::size_t block_dim = 0;
  std::size_t grid = 0;

  std::size_t num_blocks() const { return grid * grid; }
  friend bool operator==(const BlockPlan&, const BlockPlan&) = default;
};

// Both arguments powers of two with block_dim <= n; otherwise kInvalidPlan.
// The unpartitioned plan (block_dim == n) is accepted for any n >= 1.
BlockPlan make_block_plan(std::size_t n, std::size_t block_dim);

// An n x n engine-domain matrix copied into grid x grid contiguous row-major
// tiles of block_dim x block_dim, tile (I, J) at offset (I * grid + J) * bd^2.
// This contiguous layout is the transfer format handed to the engine.
class TiledMatrix {
 public:
  TiledMatrix() = default;
  TiledMatrix(const BlockPlan& plan, std::vector<std::uint32_t> data);
  // Copies each block of `full` (n x n) into its tile.
  static TiledMatrix from_dense(InputView full, const BlockPlan& plan);

  const BlockPlan& plan() const { return plan_; }
  InputView tile(std::size_t block_row, std::size_t block_col) const;
  std::uint32_t at(std::size_t r, std::size_t c) const;
  std::span<const std::uint32_t> raw() const { return data_; }

 private:
  BlockPlan plan_;
  std::vector<std::uint32_t> data_;
};

struct BlockedProduct {
  AccMatrix sums;  // exact, unreduced
  EngineStats stats;
};

// rows x n times the tiled n x n matrix. For each block pair the engine
// computes r_IJ = V_I x M_IJ; the partial sums of column block J are added
// as exact integers and the k column segments concatenate into the result.
// Throws kEngineOverflow if n * (2^input_bits - 1)^2 does not fit 64 bits.
BlockedProduct blocked_matmul(InputView a, const TiledMatrix& b, const MacEngine& engine);

// Supplies tile (block_row, block_col) on demand. The view only needs to stay
// valid until the next call.
using TileSource = std::function<InputView(std::size_t block_row, std::size_t block_col)>;

// Same merge as above with tiles produced lazily, so the full matrix never
// has to exist at once.
BlockedProduct blocked_matmul(InputView a, const BlockPlan& plan, const TileSource& tiles,
                              const MacEngine& engine);

// blocked_matmul on the mod-q matrix itself (q - 1 must fit the engine's
// input width), followed by reduction mod q.
Polynomial blocked_vec_mat_mul(const Polynomial& a, const NegacyclicMatrixZq& m,
                               const BlockPlan& plan, const MacEngine& engine,
                               EngineStats* stats = nullptr);

// The two-way split applied recursively: vector halves V1, V2 and quadrants
// A B / C D give r1 = V1 A + V2 C and r2 = V1 B + V2 D, recursing until the
// dimension is at most `leaf_dim`. Same contract as blocked_vec_mat_mul.
Polynomial recursive_split_vec_mat_mul(const Polynomial& a, const NegacyclicMatrixZq& m,
                                       std::size_t leaf_dim, const MacEngine& engine);

}  // namespace polymm

#endif  // POLYMM_NEGACYCLIC_MATRIX_H_
