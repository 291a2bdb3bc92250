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

// Serial reference paths, dense reconstruction, and monomial expansion.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cat/error.h"
#include "cat/taylornet.h"
#include "taylornet_internal.h"

namespace cat {

namespace {

std::vector<std::size_t> CoreShape(const TuckerTerm& term) {
  std::vector<std::size_t> shape{term.out_rank()};
  for (const Matrix& in : term.in_factors) shape.push_back(in.cols());
  return shape;
}

void CheckOrder(const TaylorNet& net, int order) {
  if (order < 1 || order > net.order()) {
    Fail(ErrorKind::kShape, "no order-" + std::to_string(order) + " term");
  }
}

void GuardDenseSize(const TaylorNet& net) {
  double dense = 1.0;
  for (int k = 0; k < net.order(); ++k) dense *= static_cast<double>(net.input_dim);
  if (dense > static_cast<double>(kFullTensorLimit)) {
    Fail(ErrorKind::kInvalidArgument,
         "dense coefficient tensor d^N = " + std::to_string(dense) +
             " exceeds the full-tensor limit");
  }
}

}  // namespace

Matrix ForwardReference(const TaylorNet& net, const Matrix& z) {
  if (z.cols() != net.input_dim) Fail(ErrorKind::kShape, "reference forward: input width");
  std::vector<DenseTensor> cores;
  for (const TuckerTerm& term : net.terms)
    cores.push_back(Fold(term.core, 0, CoreShape(term)));
  Matrix out(z.rows(), net.output_dim);
  std::vector<double> dz(net.input_dim);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t c = 0; c < net.input_dim; ++c) dz[c] = z(i, c) - net.expansion_point[c];
    for (std::size_t c = 0; c < net.output_dim; ++c) out(i, c) = net.bias[c];
    for (std::size_t k = 0; k < net.terms.size(); ++k) {
      const TuckerTerm& term = net.terms[k];
      // Contract the highest input mode first so the remaining mode indices
      // stay put.
      DenseTensor t = cores[k];
      for (std::size_t j = term.in_factors.size(); j-- > 0;) {
        const std::vector<double> proj = MatTVec(term.in_factors[j], dz);
        t = ModeNVectorProduct(t, proj, j + 1);
      }
      const std::vector<double> y = MatVec(term.out_factor, t.data());
      for (std::size_t c = 0; c < net.output_dim; ++c) out(i, c) += y[c];
    }
  }
  return out;
}

TaylorGradients BackwardReference(const TaylorNet& net, const Matrix& z,
                                  const Matrix& upstream) {
  if (z.cols() != net.input_dim || upstream.rows() != z.rows() ||
      upstream.cols() != net.output_dim) {
    Fail(ErrorKind::kShape, "reference backward: shape mismatch");
  }
  TaylorGradients result{ZerosLike(net), Matrix(z.rows(), net.input_dim)};
  internal::TermScratch scratch;
  std::vector<double> dz;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    internal::SampleBackward(net, z.row(i), upstream.row(i), scratch, dz, result.params,
                             result.inputs.row(i));
  }
  return result;
}

DenseTensor ReconstructCoefficients(const TaylorNet& net, int order) {
  CheckOrder(net, order);
  const TuckerTerm& term = net.terms[static_cast<std::size_t>(order - 1)];
  std::vector<Matrix> factors{term.out_factor};
  for (const Matrix& in : term.in_factors) factors.push_back(in);
  return TuckerReconstruct(Fold(term.core, 0, CoreShape(term)), factors);
}

std::vector<double> ForwardFullTensor(const TaylorNet& net, std::span<const double> z) {
  GuardDenseSize(net);
  if (z.size() != net.input_dim) Fail(ErrorKind::kShape, "full-tensor forward: input width");
  std::vector<double> dz(net.input_dim);
  for (std::size_t c = 0; c < net.input_dim; ++c) dz[c] = z[c] - net.expansion_point[c];
  std::vector<double> out = net.bias;
  for (int k = 1; k <= net.order(); ++k) {
    DenseTensor w = ReconstructCoefficients(net, k);
    // Contracting mode 1 k times consumes the input modes in order.
    for (int j = 0; j < k; ++j) w = ModeNVectorProduct(w, dz, 1);
    for (std::size_t c = 0; c < net.output_dim; ++c) out[c] += w.data()[c];
  }
  return out;
}

PolynomialExpansion ExpandMonomials(const TaylorNet& net) {
  for (double v : net.expansion_point) {
    if (v != 0.0) {
      Fail(ErrorKind::kExpansionUnsupported,
           "monomial expansion requires a zero expansion point");
    }
  }
  GuardDenseSize(net);
  PolynomialExpansion poly;
  poly.input_dim = net.input_dim;
  poly.output_dim = net.output_dim;
  poly.max_degree = net.order();
  for (Exponent& e : EnumerateExponents(net.input_dim, net.order()))
    poly.terms.emplace(std::move(e), std::vector<double>(net.output_dim, 0.0));
  poly.terms[Exponent(net.input_dim, 0)] = net.bias;

  const std::size_t d = net.input_dim;
  for (int k = 1; k <= net.order(); ++k) {
    const DenseTensor w = ReconstructCoefficients(net, k);
    const std::size_t block = w.size() / net.output_dim;  // d^k
    std::vector<std::size_t> index(static_cast<std::size_t>(k), 0);
    Exponent alpha(d, 0);
    for (std::size_t flat = 0; flat < block; ++flat) {
      std::fill(alpha.begin(), alpha.end(), 0);
      for (std::size_t idx : index) ++alpha[idx];
      std::vector<double>& coef = poly.terms.at(alpha);
      for (std::size_t c = 0; c < net.output_dim; ++c) coef[c] += w.data()[c * block + flat];
      for (std::size_t m = index.size(); m-- > 0;) {
        if (++index[m] < d) break;
        index[m] = 0;
      }
    }
  }
  return poly;
}

}  // namespace cat
