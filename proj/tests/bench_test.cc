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

#include "polymm/bench.h"

#include <gtest/gtest.h>

#include <sstream>

#include "polymm/error.h"

namespace polymm {
namespace {

BenchGrid small_grid() {
  BenchGrid grid;
  grid.degrees = {16, 32, 64};
  grid.base_sizes = {2, 4, 8};
  grid.repetitions = 2;
  grid.tile_dim = 8;
  return grid;
}

TEST(BenchGridTest, Validation) {
  BenchGrid grid = small_grid();
  grid.degrees = {24};
  EXPECT_THROW(run_bench(grid), Error);
  grid = small_grid();
  grid.repetitions = 0;
  EXPECT_THROW(run_bench(grid), Error);
  grid = small_grid();
  grid.base_sizes = {0};
  EXPECT_THROW(run_bench(grid), Error);
}

TEST(BenchGridTest, MaxNDropsDegrees) {
  BenchGrid grid;
  grid.max_n = 1024;
  EXPECT_EQ(grid.active_degrees(), (std::vector<std::size_t>{256, 1024}));
}

TEST(BenchCellConfigTest, QFillsTheBase) {
  const BenchGrid grid = small_grid();
  const PipelineConfig cfg = bench_cell_config(64, 4, grid);
  EXPECT_EQ(cfg.base.size(), 4u);
  const BigInt& q = cfg.ring.q;
  EXPECT_GT(cfg.base.product(), BigInt(64) * q * q);
  EXPECT_LE(cfg.base.product(), BigInt(64) * (q + 1) * (q + 1));
  EXPECT_EQ(cfg.engine_cfg.accumulator_bits, 32u);
}

TEST(BenchCellConfigTest, ImpossibleCountIsReported) {
  BenchGrid grid = small_grid();
  EXPECT_THROW(bench_cell_config(16, 128, grid), Error);
  grid.word_bits = 16;
  EXPECT_EQ(bench_cell_config(16, 128, grid).base.size(), 128u);
}

TEST(RunBenchTest, RowsScalingAndDeterminism) {
  const BenchGrid grid = small_grid();
  const BenchReport report = run_bench(grid);
  ASSERT_EQ(report.records.size(), 3u * 3 * 2);
  EXPECT_TRUE(report.skipped.empty());
  EXPECT_TRUE(report.all_verified());

  const auto find = [&](std::size_t n, std::size_t k) {
    for (const auto& r : report.records) {
      if (r.n == n && r.k == k && r.rep == 0) return r;
    }
    ADD_FAILURE() << "missing n=" << n << " k=" << k;
    return BenchRecord{};
  };
  for (std::size_t k : grid.base_sizes) {
    EXPECT_EQ(find(32, k).mac_count, 4 * find(16, k).mac_count);
    EXPECT_EQ(find(64, k).mac_count, 4 * find(32, k).mac_count);
    EXPECT_EQ(find(64, k).mac_count, k * 64u * 64);
  }

  const BenchReport again = run_bench(grid);
  ASSERT_EQ(again.records.size(), report.records.size());
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    EXPECT_EQ(again.records[i].q, report.records[i].q);
    EXPECT_EQ(again.records[i].mac_count, report.records[i].mac_count);
    EXPECT_EQ(again.records[i].tiles_dispatched, report.records[i].tiles_dispatched);
    EXPECT_EQ(again.records[i].estimated_cycles, report.records[i].estimated_cycles);
  }
}

TEST(RunBenchTest, SkippedCellsAreRecorded) {
  BenchGrid grid = small_grid();
  grid.degrees = {16};
  grid.base_sizes = {2, 128};
  grid.repetitions = 1;
  const BenchReport report = run_bench(grid);
  ASSERT_EQ(report.records.size(), 1u);
  ASSERT_EQ(report.skipped.size(), 1u);
  EXPECT_EQ(report.skipped[0].k, 128u);
  EXPECT_FALSE(report.skipped[0].reason.empty());
}

TEST(RunBenchTest, SpotCheckVerification) {
  BenchGrid grid = small_grid();
  grid.degrees = {64};
  grid.base_sizes = {4};
  grid.repetitions = 1;
  grid.full_verify_max_n = 16;
  EXPECT_TRUE(run_bench(grid).all_verified());
}

TEST(CsvTest, RoundTrip) {
  BenchGrid grid = small_grid();
  grid.base_sizes = {2, 128};
  grid.repetitions = 1;
  const BenchReport report = run_bench(grid);
  std::stringstream ss;
  write_bench_csv(report, ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind(kBenchCsvHeader, 0), 0u);
  EXPECT_NE(text.find("# skipped n=16 k=128: "), std::string::npos);

  const BenchReport back = read_bench_csv(ss);
  ASSERT_EQ(back.records.size(), report.records.size());
  ASSERT_EQ(back.skipped.size(), report.skipped.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    EXPECT_EQ(back.records[i].n, report.records[i].n);
    EXPECT_EQ(back.records[i].k, report.records[i].k);
    EXPECT_EQ(back.records[i].q, report.records[i].q);
    EXPECT_EQ(back.records[i].mac_count, report.records[i].mac_count);
    EXPECT_EQ(back.records[i].verified, report.records[i].verified);
    EXPECT_NEAR(back.records[i].wall_time_s, report.records[i].wall_time_s, 1e-6);
  }
  EXPECT_EQ(back.skipped[0].n, 16u);
  EXPECT_EQ(back.skipped[0].k, 128u);
  EXPECT_EQ(back.skipped[0].reason, report.skipped[0].reason);
}

TEST(CsvTest, LineNumberedErrors) {
  const auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_bench_csv(in);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string header = std::string(kBenchCsvHeader) + "\n";
  EXPECT_NE(message("n,k\n").find("line 1"), std::string::npos);
  EXPECT_NE(message(header + "16,2,17,systolic,0,0.1,5,1,1,true\n16,2\n").find("line 3"), std::string::npos);
  EXPECT_NE(message(header + "16,x,17,systolic,0,0.1,5,1,1,true\n").find("line 2"), std::string::npos);
  EXPECT_NE(message(header + "16,2,17,systolic,0,0.1,5,1,1,yes\n").find("line 2"), std::string::npos);
}

TEST(SvgTest, OneSeriesPerK) {
  BenchGrid grid = small_grid();
  grid.repetitions = 1;
  const BenchReport report = run_bench(grid);
  for (PlotMetric metric : {PlotMetric::kWallTime, PlotMetric::kMacCount}) {
    const std::string svg = render_svg(report, metric);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t lines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
    EXPECT_EQ(lines, 3u);
    EXPECT_NE(svg.find("k = 8"), std::string::npos);
  }
  EXPECT_NE(render_svg(BenchReport{}, PlotMetric::kMacCount).find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace polymm
