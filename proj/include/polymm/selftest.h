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

#ifndef POLYMM_SELFTEST_H_
#define POLYMM_SELFTEST_H_

#include <string>
#include <vector>

namespace polymm {

struct SelfTestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestReport {
  std::vector<SelfTestCase> cases;

  bool all_passed() const;
  // One "PASS name" / "FAIL name: detail" line per case.
  std::string format() const;
};

struct SelfTestOptions {
  // Flip one residue inside every pipeline product so the detector fires.
  bool inject_fault = false;
};

// Cross-checks schoolbook, Karatsuba, NTT and pipeline products, RNS round
// trips and block-plan invariance on small seeded instances.
SelfTestReport run_selftest(const SelfTestOptions& options = {});

}  // namespace polymm

#endif  // POLYMM_SELFTEST_H_
