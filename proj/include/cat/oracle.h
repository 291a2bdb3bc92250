/*
 * Copyright 2026 The CAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Randomized self-checks of the numerical kernels against independent
// oracles: dense coefficient tensors, finite differences and the explicit
// monomial form.

#ifndef CAT_ORACLE_H_
#define CAT_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace cat {

struct OracleOptions {
  std::uint64_t seed = 0;
  int trials = 200;  // random nets per forward/expansion suite
  std::size_t max_dim = 6;
  std::size_t max_outputs = 3;
  int max_order = 3;
  std::size_t max_rank = 4;
  // Runs the forward suite through the reversed Kronecker order, which must
  // make it fail.
  bool corrupt_kronecker = false;
};

struct OracleSuiteResult {
  std::string name;
  std::size_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

std::vector<OracleSuiteResult> RunOracleSuites(const OracleOptions& options);

// One "PASS|FAIL name cases=.. max_rel_err=.. tol=.." line per suite.
std::string FormatOracleReport(const std::vector<OracleSuiteResult>& results);

}  // namespace cat

#endif  // CAT_ORACLE_H_
