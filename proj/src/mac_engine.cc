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

#include <algorithm>

#include "polymm/bigint.h"
#include "polymm/error.h"

namespace polymm {

void EngineConfig::validate() const {
  if (tile_dim == 0 || !is_power_of_two(tile_dim)) {
    throw Error(ErrorCode::kConfiguration,
                "tile_dim must be a power of two, got " + std::to_string(tile_dim));
  }
  if (input_bits < 1 || input_bits > 32) {
    throw Error(ErrorCode::kConfiguration,
                "input_bits must be in [1, 32], got " + std::to_string(input_bits));
  }
  if (accumulator_bits < 1 || accumulator_bits > 64) {
    throw Error(ErrorCode::kConfiguration,
                "accumulator_bits must be in [1, 64], got " + std::to_string(accumulator_bits));
  }
}

std::uint64_t EngineConfig::max_safe_inner_dim() const {
  const u128 max_input = (static_cast<u128>(1) << input_bits) - 1;
  const u128 max_acc = (static_cast<u128>(1) << accumulator_bits) - 1;
  const u128 square = max_input * max_input;
  return static_cast<std::uint64_t>(max_acc / square);
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kNaive: return "naive";
    case Backend::kSystolic: return "systolic";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "naive") return Backend::kNaive;
  if (name == "systolic") return Backend::kSystolic;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown backend '" + std::string(name) + "' (expected naive or systolic)");
}

MacEngine::MacEngine(EngineConfig config) : config_(config) { config_.validate(); }

namespace {

bool all_below(InputView v, unsigned bits) {
  if (bits >= 32) return true;
  std::uint32_t seen = 0;
  for (std::size_t r = 0; r < v.rows; ++r) {
    const std::uint32_t* row = v.row(r);
    for (std::size_t c = 0; c < v.cols; ++c) seen |= row[c];
  }
  return (seen >> bits) == 0;
}

// c[r][j] += sum_p a[r][p] * b[p][j], c has row stride ldc.
template <typename Acc>
void mac_kernel(InputView a, InputView b, Acc* c, std::size_t ldc) {
  const std::size_t cols = b.cols;
  for (std::size_t r = 0; r < a.rows; ++r) {
    Acc* __restrict crow = c + r * ldc;
    const std::uint32_t* arow = a.row(r);
    for (std::size_t p = 0; p < a.cols; ++p) {
      const Acc av = arow[p];
      const std::uint32_t* __restrict brow = b.row(p);
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * static_cast<Acc>(brow[j]);
    }
  }
}

template <typename Acc>
void systolic_strips(InputView a, InputView b, AccMatrix& c, EngineStats& stats, std::size_t tile) {
  const std::size_t rows = a.rows, inner = a.cols, cols = b.cols;
  std::vector<Acc> strip;
  for (std::size_t j0 = 0; j0 < cols; j0 += tile) {
    const std::size_t cj = std::min(tile, cols - j0);
    strip.assign(rows * cj, Acc{0});
    for (std::size_t p0 = 0; p0 < inner; p0 += tile) {
      const std::size_t sp = std::min(tile, inner - p0);
      const InputView b_tile = b.block(p0, j0, sp, cj);
      ++stats.tile_loads;
      for (std::size_t i0 = 0; i0 < rows; i0 += tile) {
        const std::size_t ri = std::min(tile, rows - i0);
        ++stats.tile_loads;
        ++stats.tiles_dispatched;
        stats.mac_count += static_cast<std::uint64_t>(ri) * cj * sp;
        stats.estimated_cycles += systolic_tile_cycles(ri, cj, sp);
        mac_kernel<Acc>(a.block(i0, p0, ri, sp), b_tile, strip.data() + i0 * cj, cj);
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < cj; ++j) c.at(r, j0 + j) = strip[r * cj + j];
    }
  }
}

}  // namespace

MatmulResult MacEngine::matmul(InputView a, InputView b) const {
  if (a.cols != b.rows) {
    throw Error(ErrorCode::kUnsupportedShape,
                "inner dimensions differ: " + std::to_string(a.rows) + "x" +
                    std::to_string(a.cols) + " times " + std::to_string(b.rows) + "x" +
                    std::to_string(b.cols));
  }
  const std::uint64_t max_inner = config_.max_safe_inner_dim();
  if (a.cols > max_inner) {
    throw Error(ErrorCode::kEngineOverflow,
                "inner dimension " + std::to_string(a.cols) + " with " +
                    std::to_string(config_.input_bits) + "-bit inputs can exceed the " +
                    std::to_string(config_.accumulator_bits) +
                    "-bit accumulator; max safe inner dimension is " + std::to_string(max_inner));
  }
  if (!all_below(a, config_.input_bits) || !all_below(b, config_.input_bits)) {
    throw Error(ErrorCode::kOutOfRange,
                "operand element does not fit in " + std::to_string(config_.input_bits) + " bits");
  }
  MatmulResult result{AccMatrix(a.rows, b.cols), EngineStats{}};
  if (a.rows == 0 || b.cols == 0) return result;
  multiply(a, b, result.product, result.stats);
  return result;
}

void NaiveEngine::multiply(InputView a, InputView b, AccMatrix& c, EngineStats& stats) const {
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t p = 0; p < a.cols; ++p) {
      const std::uint64_t av = a.at(i, p);
      const std::uint32_t* brow = b.row(p);
      std::uint64_t* crow = &c.at(i, 0);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
  stats.mac_count += static_cast<std::uint64_t>(a.rows) * a.cols * b.cols;
}

void SystolicEngine::multiply(InputView a, InputView b, AccMatrix& c, EngineStats& stats) const {
  if (a.cols == 0) return;
  stats.estimated_cycles += kDispatchOverheadCycles;
  if (config().accumulator_bits <= 32) {
    systolic_strips<std::uint32_t>(a, b, c, stats, config().tile_dim);
  } else {
    systolic_strips<std::uint64_t>(a, b, c, stats, config().tile_dim);
  }
}

std::unique_ptr<MacEngine> make_engine(Backend backend, const EngineConfig& config) {
  switch (backend) {
    case Backend::kNaive: return std::make_unique<NaiveEngine>(config);
    case Backend::kSystolic: return std::make_unique<SystolicEngine>(config);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown backend");
}

TileOutcome systolic_simulate_tile(InputView a_tile, InputView b_tile, const EngineConfig& config) {
  config.validate();
  const std::size_t t = config.tile_dim;
  if (a_tile.rows > t || a_tile.cols > t || b_tile.cols > t) {
    throw Error(ErrorCode::kInternal, "tile exceeds the " + std::to_string(t) + "-wide array");
  }
  if (a_tile.cols != b_tile.rows) {
    throw Error(ErrorCode::kInternal, "tile inner dimensions differ");
  }
  TileOutcome out{AccMatrix(a_tile.rows, b_tile.cols), 0};
  if (a_tile.rows == 0 || b_tile.cols == 0 || a_tile.cols == 0) return out;
  mac_kernel<std::uint64_t>(a_tile, b_tile, out.partial.data.data(), out.partial.cols);
  out.cycles = systolic_tile_cycles(a_tile.rows, b_tile.cols, a_tile.cols);
  return out;
}

}  // namespace polymm
