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

#include "polymm/selftest.h"

#include <functional>
#include <random>

#include "polymm/error.h"
#include "polymm/negacyclic_matrix.h"
#include "polymm/ntt.h"
#include "polymm/pipeline.h"
#include "polymm/ring.h"
#include "polymm/rns.h"

namespace polymm {

bool SelfTestReport::all_passed() const {
  for (const auto& c : cases) {
    if (!c.passed) return false;
  }
  return true;
}

std::string SelfTestReport::format() const {
  std::string out;
  for (const auto& c : cases) {
    out += c.passed ? "PASS " : "FAIL ";
    out += c.name;
    if (!c.passed && !c.detail.empty()) out += ": " + c.detail;
    out += '\n';
  }
  return out;
}

namespace {

// Returns an empty string on success, a description otherwise.
using Check = std::function<std::string()>;

void run_case(SelfTestReport& report, std::string name, const Check& check) {
  SelfTestCase c{std::move(name), false, ""};
  try {
    c.detail = check();
    c.passed = c.detail.empty();
  } catch (const std::exception& e) {
    c.detail = std::string("threw: ") + e.what();
  }
  report.cases.push_back(std::move(c));
}

std::string pipeline_agreement(std::size_t n, const BigInt& q, unsigned word_bits, Backend backend,
                               std::size_t trials, bool inject_fault) {
  const RingParams ring(n, q);
  EngineConfig hw;
  hw.input_bits = word_bits;
  hw.accumulator_bits = word_bits <= 8 ? 32 : 64;
  GenConfigOptions options;
  options.word_bits = word_bits;
  options.backend = backend;
  const PipelineConfig cfg = gen_config(ring, hw, options);
  ExecutionOptions exec;
  exec.inject_fault = inject_fault;
  for (std::size_t t = 0; t < trials; ++t) {
    const Polynomial a = sample_polynomial(ring, 1000 + t);
    const Polynomial b = sample_polynomial(ring, 2000 + t);
    const Polynomial got = pipeline_mul(a, convert_operand_b(b, cfg), cfg, nullptr, exec);
    if (got != schoolbook_negacyclic_mul(a, b)) {
      return "mismatch at n=" + std::to_string(n) + " q=" + to_decimal(q) + " trial " + std::to_string(t);
    }
  }
  return "";
}

}  // namespace

SelfTestReport run_selftest(const SelfTestOptions& options) {
  SelfTestReport report;

  run_case(report, "karatsuba == schoolbook", [] {
    for (std::size_t n : {2, 4, 16, 64, 128}) {
      const RingParams ring(n, BigInt(12289));
      for (std::uint64_t s = 0; s < 10; ++s) {
        const Polynomial a = sample_polynomial(ring, s), b = sample_polynomial(ring, s + 77);
        if (karatsuba_negacyclic_mul(a, b, 4) != schoolbook_negacyclic_mul(a, b)) {
          return std::string("mismatch at n=") + std::to_string(n);
        }
      }
    }
    return std::string();
  });

  run_case(report, "ntt == schoolbook", [] {
    for (auto [n, q] : {std::pair<std::size_t, int>{4, 17}, {256, 7681}, {1024, 12289}}) {
      const RingParams ring(n, BigInt(q));
      const NttContext ctx = make_context(ring);
      for (std::uint64_t s = 0; s < 5; ++s) {
        const Polynomial a = sample_polynomial(ring, s), b = sample_polynomial(ring, s + 11);
        if (ntt_mul(a, b, ctx) != schoolbook_negacyclic_mul(a, b)) {
          return "mismatch at n=" + std::to_string(n);
        }
      }
    }
    return std::string();
  });

  const bool fault = options.inject_fault;
  run_case(report, "pipeline == schoolbook (8-bit, systolic)", [fault] {
    return pipeline_agreement(64, BigInt(12289), 8, Backend::kSystolic, 5, fault);
  });
  run_case(report, "pipeline == schoolbook (16-bit, naive)", [fault] {
    return pipeline_agreement(64, (BigInt(1) << 40) + 15, 16, Backend::kNaive, 5, fault);
  });
  run_case(report, "pipeline == schoolbook (n=1)", [fault] {
    return pipeline_agreement(1, BigInt(7), 8, Backend::kSystolic, 3, fault);
  });

  run_case(report, "rns round trip", [] {
    const RnsBase base({255, 254, 253, 251}, 8);
    std::mt19937_64 gen(5);
    for (int i = 0; i < 2000; ++i) {
      const BigInt x = BigInt(gen()) % base.product();
      if (crt_reconstruct(to_residues(x, base), base) != x) return "round trip failed for " + to_decimal(x);
    }
    return std::string();
  });

  run_case(report, "block invariance", [] {
    const RingParams ring(64, BigInt(17));
    const SystolicEngine engine(EngineConfig{});
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Polynomial a = sample_polynomial(ring, s), b = sample_polynomial(ring, s + 3);
      const NegacyclicMatrixZq m = build_matrix(b);
      const Polynomial ref = blocked_vec_mat_mul(a, m, make_block_plan(64, 64), engine);
      for (std::size_t bd : {1, 2, 8, 32}) {
        if (blocked_vec_mat_mul(a, m, make_block_plan(64, bd), engine) != ref) {
          return "plan block_dim=" + std::to_string(bd) + " differs";
        }
      }
    }
    return std::string();
  });

  run_case(report, "schoolbook accepts n=1", [] {
    const RingParams ring(1, BigInt(7));
    const Polynomial a = Polynomial::from_signed(ring, {BigInt(3)});
    const Polynomial b = Polynomial::from_signed(ring, {BigInt(5)});
    return schoolbook_negacyclic_mul(a, b)[0] == 1 ? std::string() : std::string("3*5 mod 7 != 1");
  });

  return report;
}

}  // namespace polymm
