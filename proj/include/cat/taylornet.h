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

// TaylorNet: an order-N Taylor polynomial over a d-vector whose order-k
// coefficient tensor is stored as a Tucker decomposition
//
//   f(z) = bias + sum_k O_k G_k [ (I_kk^T dz) (x) ... (x) (I_k1^T dz) ],
//   dz = z - expansion_point,
//
// where G_k is the mode-0 unfolding of the (r_out, r_k1, ..., r_kk) core.
// The Kronecker product is accumulated starting from I_k1^T dz, each new
// factor multiplied in from the left, so the I_k1 index varies fastest.

#ifndef CAT_TAYLORNET_H_
#define CAT_TAYLORNET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cat/polynomial.h"
#include "cat/tensor.h"

namespace cat {

struct RankConfig {
  // in[k-1][j] is the rank of input mode j of the order-k term.
  std::vector<std::vector<std::size_t>> in;
  // out[k-1] is the output rank of the order-k term.
  std::vector<std::size_t> out;
  // Output ranks above the output dimension are wasteful; reject unless set.
  bool allow_wide_output = false;

  // Same rank r for every mode of every order, as used for the defaults
  // (r = 8 at order 2, r = 16 at order 3). Output ranks are r as well, so
  // allow_wide_output is set.
  static RankConfig Uniform(int order, std::size_t rank);

  int order() const { return static_cast<int>(out.size()); }
};

struct TuckerTerm {
  int order = 0;
  Matrix core;                     // r_out x prod_j r_in[j]
  Matrix out_factor;               // o x r_out
  std::vector<Matrix> in_factors;  // order entries, each d x r_in[j]

  std::size_t out_rank() const { return out_factor.cols(); }
  std::size_t kron_size() const { return core.cols(); }
};

struct TaylorNet {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<double> bias;             // o
  std::vector<double> expansion_point;  // d
  std::vector<TuckerTerm> terms;        // terms[k-1] has order k

  int order() const { return static_cast<int>(terms.size()); }
};

// All-zero net with the given layout.
TaylorNet MakeTaylorNet(std::size_t input_dim, std::size_t output_dim,
                        const RankConfig& ranks);

// Uniform [-a, a] entries, a = sqrt(1 / columns), per matrix; bias zero;
// expansion point zero.
TaylorNet InitTaylorNet(std::size_t input_dim, std::size_t output_dim,
                        const RankConfig& ranks, std::uint64_t seed);

// Throws kShape on inconsistent shapes and kNumerical on non-finite values.
void ValidateTaylorNet(const TaylorNet& net);

// Batch forward: one row per sample. OpenMP-parallel over samples.
Matrix Forward(const TaylorNet& net, const Matrix& z);

// Gradients of sum_i <upstream_i, f(z_i)>. `params` carries one gradient per
// learnable array in the shape of the net; its expansion_point is zero and
// unused.
struct TaylorGradients {
  TaylorNet params;
  Matrix inputs;
};

// OpenMP-parallel over fixed-size sample chunks; the chunk partial sums are
// combined in chunk order so the result does not depend on the thread count.
TaylorGradients Backward(const TaylorNet& net, const Matrix& z,
                         const Matrix& upstream);

// Serial references kept for testing and benchmarking the kernels above.
// ForwardReference contracts the core one mode at a time instead of going
// through the Kronecker form.
Matrix ForwardReference(const TaylorNet& net, const Matrix& z);
TaylorGradients BackwardReference(const TaylorNet& net, const Matrix& z,
                                  const Matrix& upstream);

// Dense coefficient tensor of the order-k term, shape (o, d, ..., d).
DenseTensor ReconstructCoefficients(const TaylorNet& net, int order);

// Evaluates the polynomial through the reconstructed dense coefficient
// tensors. Rejects nets with d^N above kFullTensorLimit.
inline constexpr std::size_t kFullTensorLimit = 10'000'000;
std::vector<double> ForwardFullTensor(const TaylorNet& net,
                                      std::span<const double> z);

// Symmetrized monomial coefficients. Requires a zero expansion point.
PolynomialExpansion ExpandMonomials(const TaylorNet& net);

struct ParamCount {
  std::vector<std::size_t> per_term;
  std::size_t total = 0;             // terms + bias
  std::size_t dense_equivalent = 0;  // o * sum_k d^k + o
};

ParamCount CountParams(std::size_t input_dim, std::size_t output_dim,
                       const RankConfig& ranks);

// Zero-filled gradient buffers shaped like `net`.
TaylorNet ZerosLike(const TaylorNet& net);

namespace testing_hooks {

enum class KroneckerOrder { kDescending, kAscending };

// Forward with a selectable Kronecker operand order. Only kDescending is
// correct; kAscending exists so oracle checks can prove they catch it.
Matrix ForwardWithKroneckerOrder(const TaylorNet& net, const Matrix& z,
                                 KroneckerOrder order);

}  // namespace testing_hooks

}  // namespace cat

#endif  // CAT_TAYLORNET_H_
