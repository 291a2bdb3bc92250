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

// Shared helpers for the test binaries: random fixtures, error measures and
// a central finite-difference oracle.

#ifndef CAT_TESTS_TEST_UTIL_H_
#define CAT_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "cat/tensor.h"

namespace cat::test {

inline Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                           double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

inline DenseTensor RandomTensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  DenseTensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// |a - b| / max(|a|, |b|, floor). The floor keeps the measure meaningful for
// values that are zero up to rounding.
inline double RelativeError(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double MaxRelativeError(std::span<const double> a, std::span<const double> b,
                               double floor = 1e-12) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, RelativeError(a[i], b[i], floor));
  return worst;
}

// Central differences of a scalar function with respect to every entry of
// `x`, restoring x afterwards.
inline std::vector<double> CentralDifferences(std::span<double> x,
                                              const std::function<double()>& f,
                                              double h = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f();
    x[i] = saved - h;
    const double minus = f();
    x[i] = saved;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

}  // namespace cat::test

#endif  // CAT_TESTS_TEST_UTIL_H_
