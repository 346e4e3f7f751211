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

#include "polymm/mac_engine.h"

#include <gtest/gtest.h>

#include <random>

#include "polymm/error.h"

namespace polymm {
namespace {

InputMatrix random_matrix(std::size_t r, std::size_t c, unsigned bits, std::mt19937_64& gen) {
  InputMatrix m(r, c);
  for (auto& v : m.data) v = static_cast<std::uint32_t>(gen() & ((std::uint64_t{1} << bits) - 1));
  return m;
}

AccMatrix reference_product(const InputMatrix& a, const InputMatrix& b) {
  AccMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      std::uint64_t s = 0;
      for (std::size_t t = 0; t < a.cols; ++t) s += std::uint64_t{a.at(i, t)} * b.at(t, j);
      c.at(i, j) = s;
    }
  }
  return c;
}

TEST(EngineConfigTest, Validation) {
  EXPECT_THROW((EngineConfig{0, 8, 32}).validate(), Error);
  EXPECT_THROW((EngineConfig{128, 0, 32}).validate(), Error);
  EXPECT_THROW((EngineConfig{128, 8, 65}).validate(), Error);
  EXPECT_THROW((EngineConfig{96, 8, 32}).validate(), Error);
  EXPECT_NO_THROW((EngineConfig{128, 16, 64}).validate());
}

TEST(EngineConfigTest, MaxSafeInnerDim) {
  // 255^2 = 65025; (2^32 - 1) / 65025 = 66051.
  EXPECT_EQ((EngineConfig{128, 8, 32}).max_safe_inner_dim(), 66051u);
  EXPECT_EQ((EngineConfig{128, 16, 32}).max_safe_inner_dim(), 1u);
  EXPECT_EQ((EngineConfig{128, 16, 64}).max_safe_inner_dim(), 4295098371u);
}

TEST(MatmulTest, Identity) {
  for (Backend backend : {Backend::kNaive, Backend::kSystolic}) {
    auto engine = make_engine(backend, EngineConfig{2, 8, 32});
    InputMatrix id(2, 2), b(2, 2);
    id.at(0, 0) = id.at(1, 1) = 1;
    b.data = {9, 8, 7, 6};
    const MatmulResult r = engine->matmul(id, b);
    EXPECT_EQ(r.product, reference_product(id, b));
    EXPECT_EQ(r.stats.mac_count, 8u);
  }
}

TEST(MatmulTest, WorkedExampleShape) {
  InputMatrix a(1, 3), m(3, 3);
  a.data = {1, 2, 3};
  m.data = {4, 5, 6, 1, 4, 5, 2, 1, 4};
  for (Backend backend : {Backend::kNaive, Backend::kSystolic}) {
    const MatmulResult r = make_engine(backend, EngineConfig{})->matmul(a, m);
    EXPECT_EQ(r.product.data, (std::vector<std::uint64_t>{12, 16, 28}));
    EXPECT_EQ(r.product.data[0] % 7, 5u);
    EXPECT_EQ(r.product.data[1] % 7, 2u);
    EXPECT_EQ(r.product.data[2] % 7, 0u);
  }
}

TEST(MatmulTest, TilingArithmetic) {
  std::mt19937_64 gen(1);
  const InputMatrix a = random_matrix(256, 256, 8, gen), b = random_matrix(256, 256, 8, gen);
  SystolicEngine engine(EngineConfig{128, 8, 32});
  const MatmulResult r = engine.matmul(a, b);
  EXPECT_EQ(r.stats.tiles_dispatched, 8u);
  EXPECT_EQ(r.stats.mac_count, 256u * 256 * 256);
  EXPECT_EQ(r.stats.estimated_cycles, 8 * systolic_tile_cycles(128, 128, 128) + kDispatchOverheadCycles);
  // Weight-stationary: each B tile loads once per (inner, col) pair with its two A tiles.
  EXPECT_EQ(r.stats.tile_loads, 4u + 8u);
  EXPECT_EQ(r.product, reference_product(a, b));
}

TEST(MatmulTest, BackendsAgree) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 500; ++i) {
    const std::size_t r = 1 + gen() % 20, s = 1 + gen() % 40, t = 1 + gen() % 20;
    const unsigned bits = i % 2 ? 8 : 16;
    const EngineConfig cfg{std::size_t{1} << (gen() % 4), bits, bits == 8 ? 32u : 64u};
    const InputMatrix a = random_matrix(r, s, bits, gen), b = random_matrix(s, t, bits, gen);
    const MatmulResult naive = NaiveEngine(cfg).matmul(a, b);
    const MatmulResult sys = SystolicEngine(cfg).matmul(a, b);
    ASSERT_EQ(naive.product, sys.product);
    ASSERT_EQ(naive.product, reference_product(a, b));
    ASSERT_EQ(naive.stats.mac_count, sys.stats.mac_count);
  }
}

TEST(MatmulTest, StridedViews) {
  std::mt19937_64 gen(2);
  const InputMatrix big = random_matrix(10, 10, 8, gen);
  const InputView a = InputView(big).block(1, 2, 3, 4);
  const InputView b = InputView(big).block(5, 5, 4, 5);
  InputMatrix a_copy(3, 4), b_copy(4, 5);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) a_copy.at(i, j) = big.at(1 + i, 2 + j);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) b_copy.at(i, j) = big.at(5 + i, 5 + j);
  EXPECT_EQ(SystolicEngine(EngineConfig{2, 8, 32}).matmul(a, b).product,
            reference_product(a_copy, b_copy));
}

TEST(MatmulTest, Refusals) {
  SystolicEngine engine(EngineConfig{128, 16, 32});
  InputMatrix a(1, 2), b(2, 1);
  try {
    engine.matmul(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEngineOverflow);
    EXPECT_NE(std::string(e.what()).find("max safe inner dimension is 1"), std::string::npos);
  }
  InputMatrix wrong(3, 1);
  EXPECT_THROW(engine.matmul(a, wrong), Error);
  InputMatrix wide(1, 1), one(1, 1);
  wide.data = {1u << 16};
  one.data = {1};
  try {
    engine.matmul(wide, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
}

TEST(SystolicTileTest, CycleModel) {
  const EngineConfig cfg{128, 8, 32};
  InputMatrix a(128, 128), b(128, 128);
  TileOutcome zero = systolic_simulate_tile(a, b, cfg);
  EXPECT_EQ(zero.cycles, 510u);
  for (auto v : zero.partial.data) EXPECT_EQ(v, 0u);
  std::mt19937_64 gen(4);
  a = random_matrix(128, 128, 8, gen);
  b = random_matrix(128, 128, 8, gen);
  const TileOutcome full = systolic_simulate_tile(a, b, cfg);
  EXPECT_EQ(full.cycles, 510u);
  EXPECT_EQ(full.partial, reference_product(a, b));

  InputMatrix x(1, 1), y(1, 1);
  x.data = {3};
  y.data = {5};
  const TileOutcome one = systolic_simulate_tile(x, y, cfg);
  EXPECT_EQ(one.cycles, systolic_tile_cycles(1, 1, 1));
  EXPECT_EQ(one.cycles, 2u);
  EXPECT_EQ(one.partial.data[0], 15u);
}

TEST(SystolicTileTest, OversizeTileIsInternalError) {
  InputMatrix a(3, 3), b(3, 3);
  try {
    systolic_simulate_tile(a, b, EngineConfig{2, 8, 32});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInternal);
  }
}

TEST(BackendTest, Names) {
  EXPECT_EQ(parse_backend("naive"), Backend::kNaive);
  EXPECT_EQ(parse_backend("systolic"), Backend::kSystolic);
  EXPECT_EQ(backend_name(Backend::kSystolic), "systolic");
  EXPECT_THROW(parse_backend("gpu"), Error);
}

}  // namespace
}  // namespace polymm
