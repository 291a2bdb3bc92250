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

#include "cat/taylornet.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "cat/error.h"
#include "taylornet_internal.h"

namespace cat {

namespace {

// Samples per backward chunk. Fixed so that the reduction order, and thus
// the result bits, do not depend on how many threads run.
constexpr std::size_t kBackwardChunk = 32;

void FillUniform(Matrix& m, std::mt19937_64& rng) {
  const double a = std::sqrt(1.0 / static_cast<double>(m.cols()));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double& v : m.data()) v = dist(rng);
}

void AddInPlace(Matrix& dst, const Matrix& src) {
  auto& d = dst.data();
  const auto& s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void AddInPlace(TaylorNet& dst, const TaylorNet& src) {
  for (std::size_t c = 0; c < dst.bias.size(); ++c) dst.bias[c] += src.bias[c];
  for (std::size_t k = 0; k < dst.terms.size(); ++k) {
    AddInPlace(dst.terms[k].core, src.terms[k].core);
    AddInPlace(dst.terms[k].out_factor, src.terms[k].out_factor);
    for (std::size_t j = 0; j < dst.terms[k].in_factors.size(); ++j)
      AddInPlace(dst.terms[k].in_factors[j], src.terms[k].in_factors[j]);
  }
}

void CheckBatch(const TaylorNet& net, const Matrix& z) {
  if (z.cols() != net.input_dim) {
    Fail(ErrorKind::kShape, "taylornet input has " + std::to_string(z.cols()) +
                                " columns, expected " + std::to_string(net.input_dim));
  }
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (double v : z.row(i)) {
      if (!std::isfinite(v)) {
        Fail(ErrorKind::kNumerical,
             "non-finite taylornet input in row " + std::to_string(i));
      }
    }
  }
}

}  // namespace

namespace internal {

void TermForward(const TuckerTerm& term, std::span<const double> dz,
                 testing_hooks::KroneckerOrder order, TermScratch& s) {
  const std::size_t k = term.in_factors.size();
  s.proj.resize(k);
  for (std::size_t j = 0; j < k; ++j) s.proj[j] = MatTVec(term.in_factors[j], dz);
  s.kron = s.proj[0];
  for (std::size_t j = 1; j < k; ++j) {
    s.kron = order == testing_hooks::KroneckerOrder::kDescending
                 ? KroneckerVec(s.proj[j], s.kron)
                 : KroneckerVec(s.kron, s.proj[j]);
  }
  s.hidden = MatVec(term.core, s.kron);
}

void TermBackward(const TuckerTerm& term, std::span<const double> dz,
                  const TermScratch& s, std::span<const double> upstream,
                  TuckerTerm& grad, std::span<double> dz_grad) {
  const std::size_t k = term.in_factors.size();
  const std::size_t r_out = term.out_rank();
  const std::size_t kron_size = term.kron_size();
  const std::size_t o = term.out_factor.rows();

  // dO += u h^T
  for (std::size_t c = 0; c < o; ++c) {
    const double uc = upstream[c];
    if (uc == 0.0) continue;
    for (std::size_t r = 0; r < r_out; ++r) grad.out_factor(c, r) += uc * s.hidden[r];
  }
  const std::vector<double> hidden_grad = MatTVec(term.out_factor, upstream);
  // dG += gh kron^T
  for (std::size_t r = 0; r < r_out; ++r) {
    const double g = hidden_grad[r];
    if (g == 0.0) continue;
    double* row = grad.core.data().data() + r * kron_size;
    for (std::size_t q = 0; q < kron_size; ++q) row[q] += g * s.kron[q];
  }
  const std::vector<double> kron_grad = MatTVec(term.core, hidden_grad);

  // Each projection p_j owns one digit of the flat Kronecker index, with p_1
  // the fastest digit.
  std::vector<std::vector<double>> proj_grad(k);
  std::vector<std::size_t> radix(k);
  for (std::size_t j = 0; j < k; ++j) {
    radix[j] = s.proj[j].size();
    proj_grad[j].assign(radix[j], 0.0);
  }
  std::vector<std::size_t> digit(k, 0);
  for (std::size_t q = 0; q < kron_size; ++q) {
    const double g = kron_grad[q];
    if (g != 0.0) {
      for (std::size_t j = 0; j < k; ++j) {
        double others = g;
        for (std::size_t l = 0; l < k; ++l)
          if (l != j) others *= s.proj[l][digit[l]];
        proj_grad[j][digit[j]] += others;
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (++digit[j] < radix[j]) break;
      digit[j] = 0;
    }
  }

  const std::size_t d = dz.size();
  for (std::size_t j = 0; j < k; ++j) {
    const Matrix& in = term.in_factors[j];
    Matrix& din = grad.in_factors[j];
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t a = 0; a < radix[j]; ++a) {
        din(i, a) += dz[i] * proj_grad[j][a];
        acc += in(i, a) * proj_grad[j][a];
      }
      dz_grad[i] += acc;
    }
  }
}

void SampleForward(const TaylorNet& net, std::span<const double> z,
                   testing_hooks::KroneckerOrder order, TermScratch& s,
                   std::vector<double>& dz, std::span<double> out) {
  dz.resize(net.input_dim);
  for (std::size_t i = 0; i < net.input_dim; ++i) dz[i] = z[i] - net.expansion_point[i];
  for (std::size_t c = 0; c < net.output_dim; ++c) out[c] = net.bias[c];
  for (const TuckerTerm& term : net.terms) {
    TermForward(term, dz, order, s);
    const Matrix& of = term.out_factor;
    for (std::size_t c = 0; c < net.output_dim; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < of.cols(); ++r) acc += of(c, r) * s.hidden[r];
      out[c] += acc;
    }
  }
}

void SampleBackward(const TaylorNet& net, std::span<const double> z,
                    std::span<const double> upstream, TermScratch& s,
                    std::vector<double>& dz, TaylorNet& grad,
                    std::span<double> z_grad) {
  dz.resize(net.input_dim);
  for (std::size_t i = 0; i < net.input_dim; ++i) dz[i] = z[i] - net.expansion_point[i];
  for (std::size_t c = 0; c < net.output_dim; ++c) grad.bias[c] += upstream[c];
  for (std::size_t k = 0; k < net.terms.size(); ++k) {
    TermForward(net.terms[k], dz, testing_hooks::KroneckerOrder::kDescending, s);
    TermBackward(net.terms[k], dz, s, upstream, grad.terms[k], z_grad);
  }
}

}  // namespace internal

RankConfig RankConfig::Uniform(int order, std::size_t rank) {
  RankConfig cfg;
  cfg.allow_wide_output = true;
  for (int k = 1; k <= order; ++k) {
    cfg.in.emplace_back(static_cast<std::size_t>(k), rank);
    cfg.out.push_back(rank);
  }
  return cfg;
}

TaylorNet MakeTaylorNet(std::size_t input_dim, std::size_t output_dim,
                        const RankConfig& ranks) {
  if (input_dim == 0 || output_dim == 0) {
    Fail(ErrorKind::kShape, "taylornet dimensions must be positive");
  }
  if (ranks.order() < 1 || ranks.in.size() != ranks.out.size()) {
    Fail(ErrorKind::kShape, "rank config must list input and output ranks for orders 1..N");
  }
  TaylorNet net;
  net.input_dim = input_dim;
  net.output_dim = output_dim;
  net.bias.assign(output_dim, 0.0);
  net.expansion_point.assign(input_dim, 0.0);
  for (int k = 1; k <= ranks.order(); ++k) {
    const auto& in = ranks.in[k - 1];
    const std::size_t r_out = ranks.out[k - 1];
    if (in.size() != static_cast<std::size_t>(k)) {
      Fail(ErrorKind::kShape, "order-" + std::to_string(k) + " term needs " +
                                  std::to_string(k) + " input ranks");
    }
    if (r_out == 0) Fail(ErrorKind::kShape, "ranks must be >= 1");
    if (r_out > output_dim && !ranks.allow_wide_output) {
      Fail(ErrorKind::kShape, "order-" + std::to_string(k) + " output rank " +
                                  std::to_string(r_out) + " exceeds output dim " +
                                  std::to_string(output_dim) +
                                  " (set allow_wide_output to permit)");
    }
    TuckerTerm term;
    term.order = k;
    std::size_t kron = 1;
    for (std::size_t r : in) {
      if (r == 0) Fail(ErrorKind::kShape, "ranks must be >= 1");
      term.in_factors.emplace_back(input_dim, r);
      kron *= r;
    }
    term.core = Matrix(r_out, kron);
    term.out_factor = Matrix(output_dim, r_out);
    net.terms.push_back(std::move(term));
  }
  return net;
}

TaylorNet InitTaylorNet(std::size_t input_dim, std::size_t output_dim,
                        const RankConfig& ranks, std::uint64_t seed) {
  TaylorNet net = MakeTaylorNet(input_dim, output_dim, ranks);
  std::mt19937_64 rng(seed);
  for (TuckerTerm& term : net.terms) {
    FillUniform(term.core, rng);
    FillUniform(term.out_factor, rng);
    for (Matrix& in : term.in_factors) FillUniform(in, rng);
  }
  return net;
}

TaylorNet ZerosLike(const TaylorNet& net) {
  TaylorNet z = net;
  std::fill(z.bias.begin(), z.bias.end(), 0.0);
  std::fill(z.expansion_point.begin(), z.expansion_point.end(), 0.0);
  for (TuckerTerm& term : z.terms) {
    std::fill(term.core.data().begin(), term.core.data().end(), 0.0);
    std::fill(term.out_factor.data().begin(), term.out_factor.data().end(), 0.0);
    for (Matrix& in : term.in_factors) std::fill(in.data().begin(), in.data().end(), 0.0);
  }
  return z;
}

void ValidateTaylorNet(const TaylorNet& net) {
  const auto finite = [](const std::vector<double>& v, const std::string& what) {
    for (double x : v)
      if (!std::isfinite(x)) Fail(ErrorKind::kNumerical, "non-finite value in " + what);
  };
  if (net.bias.size() != net.output_dim) Fail(ErrorKind::kShape, "bias length != output dim");
  if (net.expansion_point.size() != net.input_dim)
    Fail(ErrorKind::kShape, "expansion point length != input dim");
  if (net.terms.empty()) Fail(ErrorKind::kShape, "taylornet needs at least one term");
  finite(net.bias, "bias");
  finite(net.expansion_point, "expansion point");
  for (std::size_t k = 0; k < net.terms.size(); ++k) {
    const TuckerTerm& t = net.terms[k];
    const std::string name = "term " + std::to_string(k + 1);
    if (t.order != static_cast<int>(k + 1) || t.in_factors.size() != k + 1)
      Fail(ErrorKind::kShape, name + ": order mismatch");
    if (t.out_factor.rows() != net.output_dim || t.out_factor.cols() != t.core.rows())
      Fail(ErrorKind::kShape, name + ": output factor shape");
    std::size_t kron = 1;
    for (const Matrix& in : t.in_factors) {
      if (in.rows() != net.input_dim) Fail(ErrorKind::kShape, name + ": input factor rows");
      kron *= in.cols();
      finite(in.data(), name + " input factor");
    }
    if (t.core.cols() != kron) Fail(ErrorKind::kShape, name + ": core columns");
    finite(t.core.data(), name + " core");
    finite(t.out_factor.data(), name + " output factor");
  }
}

Matrix testing_hooks::ForwardWithKroneckerOrder(const TaylorNet& net, const Matrix& z,
                                                KroneckerOrder order) {
  CheckBatch(net, z);
  Matrix out(z.rows(), net.output_dim);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(z.rows());
#pragma omp parallel
  {
    internal::TermScratch scratch;
    std::vector<double> dz;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      internal::SampleForward(net, z.row(i), order, scratch, dz, out.row(i));
    }
  }
  return out;
}

Matrix Forward(const TaylorNet& net, const Matrix& z) {
  return testing_hooks::ForwardWithKroneckerOrder(
      net, z, testing_hooks::KroneckerOrder::kDescending);
}

TaylorGradients Backward(const TaylorNet& net, const Matrix& z, const Matrix& upstream) {
  CheckBatch(net, z);
  if (upstream.rows() != z.rows() || upstream.cols() != net.output_dim) {
    Fail(ErrorKind::kShape, "upstream gradient shape does not match forward output");
  }
  TaylorGradients result{ZerosLike(net), Matrix(z.rows(), net.input_dim)};
  const std::size_t n = z.rows();
  const std::size_t chunks = (n + kBackwardChunk - 1) / kBackwardChunk;
  std::vector<TaylorNet> partial(chunks);
  const std::ptrdiff_t nchunks = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel
  {
    internal::TermScratch scratch;
    std::vector<double> dz;
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
      TaylorNet acc = ZerosLike(net);
      const std::size_t begin = static_cast<std::size_t>(c) * kBackwardChunk;
      const std::size_t end = std::min(n, begin + kBackwardChunk);
      for (std::size_t i = begin; i < end; ++i) {
        internal::SampleBackward(net, z.row(i), upstream.row(i), scratch, dz, acc,
                                 result.inputs.row(i));
      }
      partial[static_cast<std::size_t>(c)] = std::move(acc);
    }
  }
  for (const TaylorNet& p : partial) AddInPlace(result.params, p);
  return result;
}

ParamCount CountParams(std::size_t input_dim, std::size_t output_dim,
                       const RankConfig& ranks) {
  ParamCount count;
  std::size_t d_power = 1;
  for (int k = 1; k <= ranks.order(); ++k) {
    const auto& in = ranks.in[k - 1];
    const std::size_t r_out = ranks.out[k - 1];
    std::size_t core = r_out;
    std::size_t factors = 0;
    for (std::size_t r : in) {
      core *= r;
      factors += input_dim * r;
    }
    const std::size_t term = core + output_dim * r_out + factors;
    count.per_term.push_back(term);
    count.total += term;
    d_power *= input_dim;
    count.dense_equivalent += output_dim * d_power;
  }
  count.total += output_dim;
  count.dense_equivalent += output_dim;
  return count;
}

}  // namespace cat
