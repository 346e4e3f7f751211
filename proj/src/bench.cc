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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "polymm/error.h"
#include "polymm/ring.h"

namespace polymm {

namespace {

constexpr std::size_t kSpotChecks = 16;
constexpr std::uint64_t kStreamingThresholdBytes = std::uint64_t{256} << 20;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t n, std::size_t k, std::size_t rep,
                        std::uint64_t which) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t v : {std::uint64_t{n}, std::uint64_t{k}, std::uint64_t{rep}, which}) {
    h = splitmix64(h ^ v);
  }
  return h;
}

BigInt direct_coefficient(const Polynomial& a, const Polynomial& b, std::size_t k) {
  const std::size_t n = a.size();
  BigInt acc = 0;
  for (std::size_t i = 0; i <= k; ++i) acc += a[i] * b[k - i];
  for (std::size_t i = k + 1; i < n; ++i) acc -= a[i] * b[n + k - i];
  return mod_floor(acc, a.params().q);
}

bool verify(const Polynomial& a, const Polynomial& b, const Polynomial& c, const BenchGrid& grid,
            std::uint64_t spot_seed) {
  const std::size_t n = a.size();
  if (n <= grid.full_verify_max_n) return c == schoolbook_negacyclic_mul(a, b);
  std::mt19937_64 gen(spot_seed);
  for (std::size_t s = 0; s < kSpotChecks; ++s) {
    const std::size_t k = gen() % n;
    if (c[k] != direct_coefficient(a, b, k)) return false;
  }
  return true;
}

}  // namespace

void BenchGrid::validate() const {
  if (degrees.empty() || base_sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bench grid needs at least one degree and base size");
  }
  for (std::size_t n : degrees) {
    if (!is_power_of_two(n)) {
      throw Error(ErrorCode::kInvalidArgument, "bench degree " + std::to_string(n) + " is not a power of two");
    }
  }
  for (std::size_t k : base_sizes) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "bench base size must be >= 1");
  }
  if (repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
}

std::vector<std::size_t> BenchGrid::active_degrees() const {
  std::vector<std::size_t> out;
  for (std::size_t n : degrees) {
    if (max_n == 0 || n <= max_n) out.push_back(n);
  }
  return out;
}

bool BenchReport::all_verified() const {
  return std::all_of(records.begin(), records.end(), [](const BenchRecord& r) { return r.verified; });
}

PipelineConfig bench_cell_config(std::size_t n, std::size_t k, const BenchGrid& grid) {
  RnsBase base = select_rns_base_with_count(k, grid.word_bits);
  const BigInt q = isqrt((base.product() - 1) / n);
  if (q < 2) {
    throw Error(ErrorCode::kBaseTooSmall, "product of " + std::to_string(k) +
                                              " moduli leaves no q >= 2 with n*q^2 < M");
  }
  EngineConfig engine;
  engine.tile_dim = grid.tile_dim;
  engine.input_bits = grid.word_bits;
  const std::uint64_t top = base.max_modulus() - 1;
  const u128 worst = static_cast<u128>(n) * top * top;
  engine.accumulator_bits = worst <= 0xffffffffULL ? 32 : 64;
  std::size_t block_dim = grid.tile_dim;
  while (block_dim * 2 <= kDefaultBlockCap) block_dim *= 2;
  const BlockPlan plan = make_block_plan(n, std::min(n, block_dim));
  return make_config(RingParams(n, q), std::move(base), plan, engine, grid.backend);
}

BenchReport run_bench(const BenchGrid& grid) {
  grid.validate();
  BenchReport report;
  for (std::size_t n : grid.active_degrees()) {
    for (std::size_t k : grid.base_sizes) {
      std::optional<PipelineConfig> cfg;
      try {
        cfg = bench_cell_config(n, k, grid);
      } catch (const Error& e) {
        report.skipped.push_back(SkippedCell{n, k, e.message()});
        continue;
      }
      const bool streaming =
          static_cast<std::uint64_t>(n) * n * k * sizeof(std::uint32_t) > kStreamingThresholdBytes;
      for (std::size_t rep = 0; rep < grid.repetitions; ++rep) {
        const Polynomial a = sample_polynomial(cfg->ring, cell_seed(grid.seed, n, k, rep, 0));
        const Polynomial b = sample_polynomial(cfg->ring, cell_seed(grid.seed, n, k, rep, 1));
        PipelineStats stats;
        const auto start = std::chrono::steady_clock::now();
        Polynomial c = streaming ? pipeline_mul_streaming(a, b, *cfg, &stats)
                                 : pipeline_mul(a, convert_operand_b(b, *cfg), *cfg, &stats);
        const auto stop = std::chrono::steady_clock::now();
        BenchRecord rec;
        rec.n = n;
        rec.k = k;
        rec.q = cfg->ring.q;
        rec.backend = std::string(backend_name(grid.backend));
        rec.rep = rep;
        rec.wall_time_s = std::chrono::duration<double>(stop - start).count();
        rec.mac_count = stats.total.mac_count;
        rec.tiles_dispatched = stats.total.tiles_dispatched;
        rec.estimated_cycles = stats.total.estimated_cycles;
        rec.verified = verify(a, b, c, grid, cell_seed(grid.seed, n, k, rep, 2));
        report.records.push_back(std::move(rec));
      }
    }
  }
  return report;
}

void write_bench_csv(const BenchReport& report, std::ostream& out) {
  out << kBenchCsvHeader << '\n';
  for (const BenchRecord& r : report.records) {
    out << r.n << ',' << r.k << ',' << to_decimal(r.q) << ',' << r.backend << ',' << r.rep << ','
        << std::fixed << std::setprecision(6) << r.wall_time_s << std::defaultfloat << ','
        << r.mac_count << ',' << r.tiles_dispatched << ',' << r.estimated_cycles << ','
        << (r.verified ? "true" : "false") << '\n';
  }
  for (const SkippedCell& s : report.skipped) {
    out << "# skipped n=" << s.n << " k=" << s.k << ": " << s.reason << '\n';
  }
}

namespace {

template <typename T>
T parse_unsigned(const std::string& field, std::size_t line_no, const char* name) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": column " + name +
                                       " is not an unsigned integer: '" + field + "'");
  }
  return static_cast<T>(v);
}

}  // namespace

BenchReport read_bench_csv(std::istream& in) {
  BenchReport report;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kBenchCsvHeader) {
    throw Error(ErrorCode::kParse, "line 1: expected header '" + std::string(kBenchCsvHeader) + "'");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      SkippedCell s;
      std::istringstream ls(line);
      std::string hash, word, n_field, k_field;
      ls >> hash >> word >> n_field >> k_field;
      if (word == "skipped" && n_field.rfind("n=", 0) == 0 && k_field.rfind("k=", 0) == 0) {
        s.n = parse_unsigned<std::size_t>(n_field.substr(2), line_no, "n");
        s.k = parse_unsigned<std::size_t>(k_field.substr(2, k_field.size() - 3), line_no, "k");
        const auto colon = line.find(": ");
        s.reason = colon == std::string::npos ? "" : line.substr(colon + 2);
        report.skipped.push_back(std::move(s));
      }
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 10) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected 10 columns, found " +
                                         std::to_string(f.size()));
    }
    BenchRecord r;
    r.n = parse_unsigned<std::size_t>(f[0], line_no, "n");
    r.k = parse_unsigned<std::size_t>(f[1], line_no, "k");
    try {
      r.q = parse_decimal(f[2]);
    } catch (const Error&) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": column q is not an integer");
    }
    r.backend = f[3];
    r.rep = parse_unsigned<std::size_t>(f[4], line_no, "rep");
    try {
      std::size_t used = 0;
      r.wall_time_s = std::stod(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": column wall_time_s is not a number");
    }
    r.mac_count = parse_unsigned<std::uint64_t>(f[6], line_no, "mac_count");
    r.tiles_dispatched = parse_unsigned<std::uint64_t>(f[7], line_no, "tiles_dispatched");
    r.estimated_cycles = parse_unsigned<std::uint64_t>(f[8], line_no, "estimated_cycles");
    if (f[9] != "true" && f[9] != "false") {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": column verified must be true or false");
    }
    r.verified = f[9] == "true";
    report.records.push_back(std::move(r));
  }
  return report;
}

std::string render_svg(const BenchReport& report, PlotMetric metric) {
  // k -> n -> (sum, count)
  std::map<std::size_t, std::map<std::size_t, std::pair<double, std::size_t>>> series;
  for (const BenchRecord& r : report.records) {
    const double v = metric == PlotMetric::kWallTime ? r.wall_time_s : static_cast<double>(r.mac_count);
    auto& cell = series[r.k][r.n];
    cell.first += v;
    cell.second += 1;
  }
  const double width = 640, height = 420, left = 70, right = 130, top = 40, bottom = 50;
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& [k, points] : series) {
    for (const auto& [n, acc] : points) {
      const double x = std::log2(static_cast<double>(n));
      const double y = std::log10(std::max(acc.first / acc.second, 1e-9));
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (series.empty()) {
    x_min = 0;
    x_max = 1;
    y_min = 0;
    y_max = 1;
  }
  if (x_max - x_min < 1e-9) {
    x_min -= 1;
    x_max += 1;
  }
  if (y_max - y_min < 1e-9) {
    y_min -= 1;
    y_max += 1;
  }
  const auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (width - left - right); };
  const auto sy = [&](double y) { return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const char* label = metric == PlotMetric::kWallTime ? "wall time (s)" : "MAC count";

  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << label
      << " vs n</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(x_min)); e <= static_cast<int>(std::floor(x_max)); ++e) {
    svg << "<text x=\"" << sx(e) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">2^" << e
        << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(y_min)); e <= static_cast<int>(std::floor(y_max)); ++e) {
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(e) + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">n</text>\n";
  std::size_t idx = 0;
  for (const auto& [k, points] : series) {
    const char* color = kColors[idx % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [n, acc] : points) {
      svg << sx(std::log2(static_cast<double>(n))) << ','
          << sy(std::log10(std::max(acc.first / acc.second, 1e-9))) << ' ';
    }
    svg << "\"/>\n";
    for (const auto& [n, acc] : points) {
      svg << "<circle cx=\"" << sx(std::log2(static_cast<double>(n))) << "\" cy=\""
          << sy(std::log10(std::max(acc.first / acc.second, 1e-9))) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = top + 20 + 18 * static_cast<double>(idx);
    svg << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 35
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - right + 40 << "\" y=\"" << ly + 4 << "\">k = " << k << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace polymm
