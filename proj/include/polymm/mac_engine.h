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

#ifndef POLYMM_MAC_ENGINE_H_
#define POLYMM_MAC_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace polymm {

// Dense row-major matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{0}) {}

  T& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

using InputMatrix = Matrix<std::uint32_t>;
using AccMatrix = Matrix<std::uint64_t>;

// Non-owning row-major window; `stride` is the distance between rows.
struct InputView {
  const std::uint32_t* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;

  InputView() = default;
  InputView(const std::uint32_t* d, std::size_t r, std::size_t c, std::size_t s)
      : data(d), rows(r), cols(c), stride(s) {}
  InputView(const InputMatrix& m)  // NOLINT(google-explicit-constructor)
      : data(m.data.data()), rows(m.rows), cols(m.cols), stride(m.cols) {}

  const std::uint32_t* row(std::size_t r) const { return data + r * stride; }
  std::uint32_t at(std::size_t r, std::size_t c) const { return data[r * stride + c]; }
  InputView block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    return InputView(data + r0 * stride + c0, nr, nc, stride);
  }
};

struct EngineConfig {
  std::size_t tile_dim = 128;     // systolic array edge
  unsigned input_bits = 8;        // every operand element is < 2^input_bits
  unsigned accumulator_bits = 32; // at most 64

  // Throws kConfiguration on a malformed config.
  void validate() const;
  // Largest s with s * (2^input_bits - 1)^2 <= 2^accumulator_bits - 1.
  std::uint64_t max_safe_inner_dim() const;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct EngineStats {
  std::uint64_t mac_count = 0;
  std::uint64_t tile_loads = 0;
  std::uint64_t tiles_dispatched = 0;
  std::uint64_t estimated_cycles = 0;

  EngineStats& operator+=(const EngineStats& o) {
    mac_count += o.mac_count;
    tile_loads += o.tile_loads;
    tiles_dispatched += o.tiles_dispatched;
    estimated_cycles += o.estimated_cycles;
    return *this;
  }
  friend bool operator==(const EngineStats&, const EngineStats&) = default;
};

// Fixed per-dispatch latency added to estimated_cycles by the systolic
// backend. It stands in for host-side launch cost, which makes tiny products
// cost roughly the same; the value is a modeling choice.
inline constexpr std::uint64_t kDispatchOverheadCycles = 256;

// Wavefront estimate for one tile: (rows + cols + inner - 2) to fill and
// drain the array, plus `inner` cycles of streaming.
constexpr std::uint64_t systolic_tile_cycles(std::size_t rows, std::size_t cols, std::size_t inner) {
  return static_cast<std::uint64_t>(rows + cols + inner - 2) + inner;
}

enum class Backend { kNaive, kSystolic };

std::string_view backend_name(Backend backend);
// Accepts "naive" or "systolic"; throws kInvalidArgument otherwise.
Backend parse_backend(std::string_view name);

struct MatmulResult {
  AccMatrix product;
  EngineStats stats;
};

// Exact integer matrix product C = A * B with no modular reduction. Calls are
// const and share no mutable state, so one engine may serve many threads.
class MacEngine {
 public:
  explicit MacEngine(EngineConfig config);
  virtual ~MacEngine() = default;

  virtual Backend backend() const = 0;
  const EngineConfig& config() const { return config_; }

  // Refuses (kEngineOverflow) any product whose inner dimension could exceed
  // the accumulator, and (kOutOfRange) any element >= 2^input_bits.
  MatmulResult matmul(InputView a, InputView b) const;

 protected:
  virtual void multiply(InputView a, InputView b, AccMatrix& c, EngineStats& stats) const = 0;

 private:
  EngineConfig config_;
};

// Straight triple loop over the whole operands; reports mac_count only.
class NaiveEngine final : public MacEngine {
 public:
  using MacEngine::MacEngine;
  Backend backend() const override { return Backend::kNaive; }

 protected:
  void multiply(InputView a, InputView b, AccMatrix& c, EngineStats& stats) const override;
};

// Splits operands into tile_dim-sized tiles and streams them through a
// simulated weight-stationary array: for every (inner, column) tile pair the B
// tile is loaded once, then each A tile of that inner strip is loaded and
// dispatched. tile_loads counts both kinds of load.
class SystolicEngine final : public MacEngine {
 public:
  using MacEngine::MacEngine;
  Backend backend() const override { return Backend::kSystolic; }

 protected:
  void multiply(InputView a, InputView b, AccMatrix& c, EngineStats& stats) const override;
};

std::unique_ptr<MacEngine> make_engine(Backend backend, const EngineConfig& config);

struct TileOutcome {
  AccMatrix partial;
  std::uint64_t cycles = 0;
};

// One array pass. Throws kInternal if a tile exceeds tile_dim in any
// dimension. Timing never depends on the data.
TileOutcome systolic_simulate_tile(InputView a_tile, InputView b_tile, const EngineConfig& config);

}  // namespace polymm

#endif  // POLYMM_MAC_ENGINE_H_
