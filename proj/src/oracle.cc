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

#include "cat/oracle.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>

#include "cat/error.h"
#include "cat/interpret.h"
#include "cat/taylornet.h"
#include "cat/training.h"

namespace cat {

namespace {

double RelErr(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Matrix Uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

TaylorNet RandomNet(std::mt19937_64& rng, const OracleOptions& opt, std::size_t max_dim) {
  const std::size_t d = 1 + rng() % max_dim;
  const std::size_t o = 1 + rng() % opt.max_outputs;
  const int order = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(opt.max_order));
  RankConfig ranks;
  ranks.allow_wide_output = true;
  for (int k = 1; k <= order; ++k) {
    std::vector<std::size_t> in;
    for (int j = 0; j < k; ++j) in.push_back(1 + rng() % opt.max_rank);
    ranks.in.push_back(in);
    ranks.out.push_back(1 + rng() % opt.max_rank);
  }
  TaylorNet net = InitTaylorNet(d, o, ranks, rng());
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& b : net.bias) b = dist(rng);
  return net;
}

std::vector<double> CentralDifferences(std::span<double> x, const std::function<double()>& f,
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

// Central differences that shrink the step when the one-sided differences
// disagree, which happens when the step crosses a leaky-ReLU kink.
std::vector<double> KinkAwareDifferences(std::span<double> x, const std::function<double()>& f) {
  std::vector<double> grad(x.size());
  const double f0 = f();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    for (double h = 1e-5;; h *= 1e-2) {
      x[i] = saved + h;
      const double plus = f();
      x[i] = saved - h;
      const double minus = f();
      x[i] = saved;
      const double fwd = (plus - f0) / h, bwd = (f0 - minus) / h;
      grad[i] = (plus - minus) / (2.0 * h);
      if (h < 1e-8 || std::abs(fwd - bwd) <= 1e-3 * std::max({std::abs(fwd), std::abs(bwd), 1e-3}))
        break;
    }
  }
  return grad;
}

std::vector<std::span<double>> NetParams(TaylorNet& net) {
  std::vector<std::span<double>> out{net.bias};
  for (TuckerTerm& t : net.terms) {
    out.emplace_back(t.core.data());
    out.emplace_back(t.out_factor.data());
    for (Matrix& f : t.in_factors) out.emplace_back(f.data());
  }
  return out;
}

OracleSuiteResult ForwardSuite(const OracleOptions& opt, bool reference) {
  OracleSuiteResult r;
  r.name = reference ? "reference_forward_matches_full_tensor" : "forward_matches_full_tensor";
  r.tolerance = 1e-10;
  std::mt19937_64 rng(opt.seed * 7919 + (reference ? 2 : 1));
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  for (int t = 0; t < opt.trials; ++t) {
    TaylorNet net = RandomNet(rng, opt, opt.max_dim);
    if (t % 2) {
      for (double& v : net.expansion_point) v = shift(rng);
    }
    const Matrix z = Uniform(3, net.input_dim, rng);
    Matrix out;
    if (reference) {
      out = ForwardReference(net, z);
    } else if (opt.corrupt_kronecker) {
      out = testing_hooks::ForwardWithKroneckerOrder(net, z, testing_hooks::KroneckerOrder::kAscending);
    } else {
      out = Forward(net, z);
    }
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const std::vector<double> full = ForwardFullTensor(net, z.row(i));
      for (std::size_t c = 0; c < full.size(); ++c)
        r.max_error = std::max(r.max_error, RelErr(out(i, c), full[c], 1e-8));
    }
    ++r.cases;
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

OracleSuiteResult TaylorGradientSuite(const OracleOptions& opt) {
  OracleSuiteResult r;
  r.name = "taylornet_gradients_match_finite_differences";
  r.tolerance = 1e-4;
  std::mt19937_64 rng(opt.seed * 7919 + 3);
  const int trials = std::max(5, opt.trials / 20);
  for (int t = 0; t < trials; ++t) {
    TaylorNet net = RandomNet(rng, opt, std::min<std::size_t>(opt.max_dim, 4));
    const Matrix z = Uniform(4, net.input_dim, rng);
    const Matrix up = Uniform(4, net.output_dim, rng);
    TaylorGradients g = Backward(net, z, up);
    auto loss = [&] {
      const Matrix f = Forward(net, z);
      double s = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) s += f.data()[i] * up.data()[i];
      return s;
    };
    auto params = NetParams(net);
    auto grads = NetParams(g.params);
    for (std::size_t p = 0; p < params.size(); ++p) {
      const std::vector<double> fd = CentralDifferences(params[p], loss);
      for (std::size_t i = 0; i < fd.size(); ++i)
        r.max_error = std::max(r.max_error, RelErr(grads[p][i], fd[i], 1e-4));
    }
    Matrix zc = z;
    const std::vector<double> fdz = CentralDifferences(zc.data(), [&] {
      const Matrix f = Forward(net, zc);
      double s = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) s += f.data()[i] * up.data()[i];
      return s;
    });
    for (std::size_t i = 0; i < fdz.size(); ++i)
      r.max_error = std::max(r.max_error, RelErr(g.inputs.data()[i], fdz[i], 1e-4));
    ++r.cases;
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

OracleSuiteResult ModelGradientSuite(const OracleOptions& opt) {
  OracleSuiteResult r;
  r.name = "catmodel_gradients_match_finite_differences";
  r.tolerance = 1e-3;
  std::mt19937_64 rng(opt.seed * 7919 + 4);
  for (int t = 0; t < 3; ++t) {
    ModelLayout layout;
    layout.task = t == 2 ? Task::kClassification : Task::kRegression;
    layout.num_outputs = t == 2 ? 3 : 1;
    layout.num_features = 4;
    layout.concept_names = {"g1", "g2"};
    layout.concept_columns = {{0, 1}, {2, 3}};
    layout.hidden = {4, 4, 2};
    CatModel model = MakeCatModel(layout, RankConfig::Uniform(2, 2), 0.0, rng());
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    for (double& b : model.net.bias) b = dist(rng);
    const Matrix x = Uniform(6, 4, rng);
    std::vector<double> y;
    for (std::size_t i = 0; i < 6; ++i)
      y.push_back(layout.task == Task::kRegression ? dist(rng) : static_cast<double>(i % 3));
    auto loss_of = [&](const Matrix& out) {
      return layout.task == Task::kRegression ? MseLoss(out, y) : SoftmaxCrossEntropy(out, y);
    };
    std::mt19937_64 unused(0);
    ModelTape tape;
    const LossResult loss = loss_of(ForwardTrain(model, x, 0.0, unused, tape));
    CatModel grad = BackwardModel(model, tape, loss.grad);
    std::vector<ParamRef> params = Parameters(model);
    std::vector<ParamRef> grads = Parameters(grad);
    for (std::size_t p = 0; p < params.size(); ++p) {
      const std::vector<double> fd =
          KinkAwareDifferences(params[p].values, [&] { return loss_of(Predict(model, x)).value; });
      for (std::size_t i = 0; i < fd.size(); ++i)
        r.max_error = std::max(r.max_error, RelErr(grads[p].values[i], fd[i], 1e-3));
    }
    ++r.cases;
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

OracleSuiteResult ExpansionSuite(const OracleOptions& opt) {
  OracleSuiteResult r;
  r.name = "expansion_matches_forward";
  r.tolerance = 1e-9;
  std::mt19937_64 rng(opt.seed * 7919 + 5);
  for (int t = 0; t < opt.trials; ++t) {
    const TaylorNet net = RandomNet(rng, opt, opt.max_dim);
    const PolynomialExpansion poly = ExpandMonomials(net);
    const Matrix z = Uniform(3, net.input_dim, rng);
    const Matrix f = Forward(net, z);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const std::vector<double> e = poly.Evaluate(z.row(i));
      for (std::size_t c = 0; c < e.size(); ++c)
        r.max_error = std::max(r.max_error, RelErr(e[c], f(i, c), 1e-8));
    }
    ++r.cases;
  }
  r.passed = r.max_error < r.tolerance;
  return r;
}

OracleSuiteResult StructureSuite(const OracleOptions& opt) {
  OracleSuiteResult r;
  r.name = "term_and_parameter_counts";
  r.tolerance = 0.0;
  std::mt19937_64 rng(opt.seed * 7919 + 6);
  double mismatches = 0.0;
  const TaylorNet six = MakeTaylorNet(6, 1, RankConfig::Uniform(2, 1));
  if (ExpandMonomials(six).terms.size() != 28) mismatches += 1;
  ++r.cases;
  for (int t = 0; t < 20; ++t) {
    TaylorNet net = RandomNet(rng, opt, opt.max_dim);
    RankConfig ranks;
    ranks.allow_wide_output = true;
    for (const TuckerTerm& term : net.terms) {
      std::vector<std::size_t> in;
      for (const Matrix& f : term.in_factors) in.push_back(f.cols());
      ranks.in.push_back(in);
      ranks.out.push_back(term.out_rank());
    }
    std::size_t arrays = 0;
    for (auto span : NetParams(net)) arrays += span.size();
    if (CountParams(net.input_dim, net.output_dim, ranks).total != arrays) mismatches += 1;
    ++r.cases;
  }
  r.max_error = mismatches;
  r.passed = mismatches == 0.0;
  return r;
}

}  // namespace

std::vector<OracleSuiteResult> RunOracleSuites(const OracleOptions& opt) {
  if (opt.trials < 1 || opt.max_dim < 1 || opt.max_outputs < 1 || opt.max_order < 1 ||
      opt.max_rank < 1)
    Fail(ErrorKind::kInvalidArgument, "oracle sizes and trial counts must be >= 1");
  return {ForwardSuite(opt, false), ForwardSuite(opt, true), TaylorGradientSuite(opt),
          ModelGradientSuite(opt), ExpansionSuite(opt), StructureSuite(opt)};
}

std::string FormatOracleReport(const std::vector<OracleSuiteResult>& results) {
  std::string out;
  for (const OracleSuiteResult& r : results) {
    char err[32], tol[32];
    std::snprintf(err, sizeof err, "%.3e", r.max_error);
    std::snprintf(tol, sizeof tol, "%.0e", r.tolerance);
    out += std::string(r.passed ? "PASS " : "FAIL ") + r.name + " cases=" + std::to_string(r.cases) +
           " max_rel_err=" + err + " tol=" + tol + "\n";
  }
  return out;
}

}  // namespace cat
