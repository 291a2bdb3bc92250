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

// Explanations of a trained model: the polynomial in text form,
// standardized monomial contributions and per-concept shape functions.

#ifndef CAT_INTERPRET_H_
#define CAT_INTERPRET_H_

#include <span>
#include <string>
#include <vector>

#include "cat/model.h"
#include "cat/polynomial.h"
#include "json.hpp"

namespace cat {

// Shortest decimal that reads back to the same double; "1.0" rather than "1".
std::string FormatNumber(double v);

// "z1^2*z3" style label; the constant is "1".
std::string MonomialLabel(const Exponent& e);

struct Contribution {
  Exponent exponent;
  std::string label;
  std::vector<double> coefficient;   // per output
  double monomial_std = 0.0;         // population std of z^e over the reference rows
  std::vector<double> standardized;  // per output
  double score = 0.0;                // max over outputs of |standardized|
};

struct ContributionReport {
  std::vector<std::string> concept_names;
  std::vector<std::string> output_labels;
  // Regression: std of the reference targets. Classification: std of each
  // centred logit (logit minus the mean logit) over the reference rows.
  std::vector<double> scale;
  // Every non-constant monomial, by descending score; ties keep the
  // rendering order.
  std::vector<Contribution> entries;
  // Labels of the entries with a nonzero score, in the same order.
  std::vector<std::string> ranking;
};

// Regression: standardized = coef * std(z^e) / std(targets); a constant
// target is kInvalidArgument. Classification uses centred coefficients and
// the centred-logit scale, and ignores `targets`.
ContributionReport StandardizedContributions(const PolynomialExpansion& poly, const Matrix& z,
                                             Task task, std::span<const double> targets,
                                             std::vector<std::string> concept_names,
                                             std::vector<std::string> output_labels);

struct Histogram {
  std::vector<double> edges;  // bins + 1, nondecreasing
  std::vector<double> mass;   // sums to 1
};

// Equal-width bins over [min, max]. Identical values give one bin of mass 1.
Histogram DensityBins(std::span<const double> values, std::size_t bins = 25);

// s_m(v): the terms that involve concept m alone, other concepts at zero.
// Returns grid.size() x output_dim.
Matrix ShapeFunction(const PolynomialExpansion& poly, std::size_t concept_index,
                     std::span<const double> grid);

struct ShapeFunctionTable {
  std::string concept_name;
  std::vector<double> grid;
  Matrix values;  // grid x outputs
  Histogram density;
};

std::vector<ShapeFunctionTable> ShapeFunctions(const PolynomialExpansion& poly, const Matrix& z,
                                               const std::vector<std::string>& concept_names,
                                               std::size_t points = 200, std::size_t bins = 25);

// Terms in descending lexicographic exponent order (z1 terms first), the
// constant last, coefficients rounded to `precision` decimals and terms that
// round to zero left out. With several outputs, one "label: ..." line each.
std::string RenderPolynomial(const PolynomialExpansion& poly, int precision,
                             const std::vector<std::string>& output_labels = {});

nlohmann::json ContributionsToJson(const ContributionReport& report);
std::string ContributionsToCsv(const ContributionReport& report);
nlohmann::json ShapesToJson(const std::vector<ShapeFunctionTable>& shapes,
                            const std::vector<std::string>& output_labels);
std::string ShapesToCsv(const std::vector<ShapeFunctionTable>& shapes,
                        const std::vector<std::string>& output_labels);

// Plots of the last output (the positive class of a binary task).
std::string ContributionsSvg(const ContributionReport& report, std::size_t max_bars = 30);
std::string ShapesSvg(const std::vector<ShapeFunctionTable>& shapes);

}  // namespace cat

#endif  // CAT_INTERPRET_H_
