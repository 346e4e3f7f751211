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

// polymm command-line front end: mul | bench | selftest | plot.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "polymm/bench.h"
#include "polymm/error.h"
#include "polymm/ntt.h"
#include "polymm/pipeline.h"
#include "polymm/ring.h"
#include "polymm/selftest.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw polymm::Error(polymm::ErrorCode::kParse, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

polymm::Polynomial load_operand(const std::string& arg, bool inline_text, const char* which) {
  try {
    return polymm::parse_polynomial(inline_text ? arg : read_file(arg));
  } catch (const polymm::Error& e) {
    throw polymm::Error(polymm::ErrorCode::kParse, std::string("operand ") + which + ": " + e.message());
  }
}

struct MulArgs {
  std::string a, b;
  bool inline_text = false;
  std::string method = "pipeline";
  std::string config_path;
  std::string backend = "systolic";
  unsigned word_bits = 8;
  std::size_t threshold = polymm::kDefaultKaratsubaThreshold;
  bool verify = false;
};

int cmd_mul(const MulArgs& args) {
  using namespace polymm;
  const Polynomial a = load_operand(args.a, args.inline_text, "a");
  const Polynomial b = load_operand(args.b, args.inline_text, "b");
  require_same_params(a, b);

  std::optional<Polynomial> c;
  if (args.method == "schoolbook") {
    c = schoolbook_negacyclic_mul(a, b);
  } else if (args.method == "karatsuba") {
    c = karatsuba_negacyclic_mul(a, b, args.threshold);
  } else if (args.method == "ntt") {
    c = ntt_mul(a, b, make_context(a.params()));
  } else {
    PipelineConfig cfg = [&] {
      if (!args.config_path.empty()) return load_config_file(args.config_path);
      EngineConfig hw;
      hw.input_bits = args.word_bits;
      hw.accumulator_bits = args.word_bits <= 8 ? 32 : 64;
      GenConfigOptions options;
      options.word_bits = args.word_bits;
      options.backend = parse_backend(args.backend);
      return gen_config(a.params(), hw, options);
    }();
    c = pipeline_mul(a, convert_operand_b(b, cfg), cfg);
  }
  std::cout << format_coefficients(*c) << '\n';
  if (args.verify) {
    const Polynomial expected = schoolbook_negacyclic_mul(a, b);
    if (*c != expected) {
      std::cerr << "verification failed: schoolbook gives " << format_coefficients(expected) << '\n';
      return kExitVerifyFailed;
    }
    std::cerr << "verified against schoolbook\n";
  }
  return kExitOk;
}

struct BenchArgs {
  polymm::BenchGrid grid;
  std::string backend = "systolic";
  std::string out;
  std::string plot_prefix;
};

void write_plots(const polymm::BenchReport& report, const std::string& prefix) {
  for (auto [metric, suffix] : {std::pair{polymm::PlotMetric::kWallTime, "_time.svg"},
                                std::pair{polymm::PlotMetric::kMacCount, "_macs.svg"}}) {
    std::ofstream svg(prefix + suffix);
    if (!svg) throw polymm::Error(polymm::ErrorCode::kParse, "cannot write " + prefix + suffix);
    svg << polymm::render_svg(report, metric);
  }
}

int cmd_bench(BenchArgs args) {
  args.grid.backend = polymm::parse_backend(args.backend);
  const polymm::BenchReport report = polymm::run_bench(args.grid);
  if (args.out.empty() || args.out == "-") {
    polymm::write_bench_csv(report, std::cout);
  } else {
    std::ofstream out(args.out);
    if (!out) throw polymm::Error(polymm::ErrorCode::kParse, "cannot write " + args.out);
    polymm::write_bench_csv(report, out);
  }
  for (const auto& s : report.skipped) {
    std::cerr << "skipped n=" << s.n << " k=" << s.k << ": " << s.reason << '\n';
  }
  if (!args.plot_prefix.empty()) write_plots(report, args.plot_prefix);
  return report.all_verified() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negacyclic polynomial multiplication through blocked integer matmul"};
  app.require_subcommand(1);

  MulArgs mul;
  auto* mul_cmd = app.add_subcommand("mul", "Multiply two polynomials in Z_q[x]/(x^n+1)");
  mul_cmd->add_option("a", mul.a, "First operand (file, or text with --inline)")->required();
  mul_cmd->add_option("b", mul.b, "Second operand (file, or text with --inline)")->required();
  mul_cmd->add_flag("--inline", mul.inline_text, "Treat a and b as polynomial text, not paths");
  mul_cmd->add_option("--method", mul.method, "pipeline | schoolbook | karatsuba | ntt")
      ->check(CLI::IsMember({"pipeline", "schoolbook", "karatsuba", "ntt"}));
  mul_cmd->add_option("--config", mul.config_path, "Pipeline config JSON");
  mul_cmd->add_option("--backend", mul.backend, "naive | systolic")
      ->check(CLI::IsMember({"naive", "systolic"}));
  mul_cmd->add_option("--word-bits", mul.word_bits, "RNS modulus width");
  mul_cmd->add_option("--threshold", mul.threshold, "Karatsuba schoolbook cutoff");
  mul_cmd->add_flag("--verify", mul.verify, "Cross-check against schoolbook");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the degree x base-size grid and emit CSV");
  bench_cmd->add_option("--degrees", bench.grid.degrees, "Polynomial sizes n");
  bench_cmd->add_option("--base-sizes", bench.grid.base_sizes, "Forced RNS base sizes k");
  bench_cmd->add_option("--reps", bench.grid.repetitions, "Repetitions per cell");
  bench_cmd->add_option("--seed", bench.grid.seed, "Input seed");
  bench_cmd->add_option("--max-n", bench.grid.max_n, "Skip degrees above this n");
  bench_cmd->add_option("--word-bits", bench.grid.word_bits, "RNS modulus width");
  bench_cmd->add_option("--backend", bench.backend, "naive | systolic")
      ->check(CLI::IsMember({"naive", "systolic"}));
  bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");
  bench_cmd->add_option("--plot", bench.plot_prefix, "Write <prefix>_time.svg and <prefix>_macs.svg");

  bool inject_fault = false;
  auto* self_cmd = app.add_subcommand("selftest", "Run the cross-oracle suites");
  self_cmd->add_flag("--inject-fault", inject_fault, "Corrupt one residue to exercise the detector");

  std::string plot_in, plot_prefix = "bench";
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG charts from a bench CSV");
  plot_cmd->add_option("csv", plot_in, "Bench CSV")->required();
  plot_cmd->add_option("--out", plot_prefix, "Output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mul_cmd) return cmd_mul(mul);
    if (*bench_cmd) return cmd_bench(bench);
    if (*self_cmd) {
      const polymm::SelfTestReport report = polymm::run_selftest({inject_fault});
      std::cout << report.format();
      return report.all_passed() ? kExitOk : kExitVerifyFailed;
    }
    if (*plot_cmd) {
      std::ifstream in(plot_in);
      if (!in) throw polymm::Error(polymm::ErrorCode::kParse, "cannot open " + plot_in);
      write_plots(polymm::read_bench_csv(in), plot_prefix);
      return kExitOk;
    }
  } catch (const polymm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
