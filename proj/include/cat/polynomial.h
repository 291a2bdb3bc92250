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

#ifndef CAT_POLYNOMIAL_H_
#define CAT_POLYNOMIAL_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cat {

// Exponent vector of a monomial: z_1^e[0] * z_2^e[1] * ...
using Exponent = std::vector<int>;

int Degree(const Exponent& e);

// Value of prod_m z_m^e[m].
double MonomialValue(const Exponent& e, std::span<const double> z);

// Explicit monomial form of a polynomial with vector-valued coefficients.
// Every monomial of total degree <= max_degree is present, zero or not.
struct PolynomialExpansion {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  int max_degree = 0;
  std::map<Exponent, std::vector<double>> terms;

  std::vector<double> Evaluate(std::span<const double> z) const;

  // All-zero exponent.
  const std::vector<double>& Constant() const;
};

// Every exponent of length `dims` with total degree <= max_degree, in
// ascending lexicographic order.
std::vector<Exponent> EnumerateExponents(std::size_t dims, int max_degree);

}  // namespace cat

#endif  // CAT_POLYNOMIAL_H_
