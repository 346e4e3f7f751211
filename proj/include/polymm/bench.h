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

#ifndef POLYMM_BENCH_H_
#define POLYMM_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polymm/bigint.h"
#include "polymm/mac_engine.h"
#include "polymm/pipeline.h"

namespace polymm {

inline constexpr const char* kBenchCsvHeader =
    "n,k,q,backend,rep,wall_time_s,mac_count,tiles_dispatched,estimated_cycles,verified";

// Degrees x forced RNS base sizes. For each cell the base is the first k
// moduli of the greedy descent and q is the largest value with n*q^2 < M.
struct BenchGrid {
  std::vector<std::size_t> degrees{256, 1024, 16384};
  std::vector<std::size_t> base_sizes{8, 16, 128};
  std::size_t repetitions = 3;
  Backend backend = Backend::kSystolic;
  std::uint64_t seed = 1;
  unsigned word_bits = 8;
  std::size_t tile_dim = 128;
  std::size_t max_n = 0;  // 0: no limit; larger degrees are dropped
  // Exact schoolbook comparison up to this n; above it 16 coefficients are
  // spot-checked against direct convolution sums.
  std::size_t full_verify_max_n = 1024;

  // Throws kInvalidArgument for non-power-of-two degrees or zero repetitions.
  void validate() const;
  std::vector<std::size_t> active_degrees() const;
};

struct BenchRecord {
  std::size_t n = 0;
  std::size_t k = 0;
  BigInt q;
  std::string backend;
  std::size_t rep = 0;
  double wall_time_s = 0.0;
  std::uint64_t mac_count = 0;
  std::uint64_t tiles_dispatched = 0;
  std::uint64_t estimated_cycles = 0;
  bool verified = false;
};

struct SkippedCell {
  std::size_t n = 0;
  std::size_t k = 0;
  std::string reason;
};

struct BenchReport {
  std::vector<BenchRecord> records;  // grid order: n, then k, then rep
  std::vector<SkippedCell> skipped;

  bool all_verified() const;
};

// Configuration used for one grid cell; throws when k or the bounds cannot be
// met (run_bench turns that into a SkippedCell).
PipelineConfig bench_cell_config(std::size_t n, std::size_t k, const BenchGrid& grid);

BenchReport run_bench(const BenchGrid& grid);

// Records as CSV rows under kBenchCsvHeader; skipped cells as trailing
// "# skipped n=<n> k=<k>: <reason>" comment lines.
void write_bench_csv(const BenchReport& report, std::ostream& out);
// Inverse of write_bench_csv. Throws kParse with a line number.
BenchReport read_bench_csv(std::istream& in);

enum class PlotMetric { kWallTime, kMacCount };

// Standalone SVG line chart, x = n (log2), y = metric (log10), one line per k
// averaged over repetitions.
std::string render_svg(const BenchReport& report, PlotMetric metric);

}  // namespace polymm

#endif  // POLYMM_BENCH_H_
