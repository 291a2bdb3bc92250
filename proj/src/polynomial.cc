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

#include "cat/polynomial.h"

#include <cmath>
#include <numeric>

#include "cat/error.h"

namespace cat {

namespace {

void Enumerate(std::size_t pos, int remaining, Exponent& current,
               std::vector<Exponent>& out) {
  if (pos == current.size()) {
    out.push_back(current);
    return;
  }
  for (int p = 0; p <= remaining; ++p) {
    current[pos] = p;
    Enumerate(pos + 1, remaining - p, current, out);
  }
  current[pos] = 0;
}

}  // namespace

int Degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

double MonomialValue(const Exponent& e, std::span<const double> z) {
  double v = 1.0;
  for (std::size_t m = 0; m < e.size(); ++m) {
    for (int p = 0; p < e[m]; ++p) v *= z[m];
  }
  return v;
}

std::vector<double> PolynomialExpansion::Evaluate(std::span<const double> z) const {
  if (z.size() != input_dim) Fail(ErrorKind::kShape, "polynomial input width mismatch");
  std::vector<double> out(output_dim, 0.0);
  for (const auto& [e, coef] : terms) {
    const double v = MonomialValue(e, z);
    for (std::size_t c = 0; c < output_dim; ++c) out[c] += coef[c] * v;
  }
  return out;
}

const std::vector<double>& PolynomialExpansion::Constant() const {
  return terms.at(Exponent(input_dim, 0));
}

std::vector<Exponent> EnumerateExponents(std::size_t dims, int max_degree) {
  std::vector<Exponent> out;
  Exponent current(dims, 0);
  Enumerate(0, max_degree, current, out);
  return out;
}

}  // namespace cat
