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

#include "cat/interpret.h"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cat/error.h"
#include "cat/taylornet.h"
#include "cat/training.h"
#include "doctest.h"
#include "test_util.h"

namespace cat {
namespace {

using test::RandomMatrix;
using test::RelativeError;

PolynomialExpansion EmptyPoly(std::size_t d, std::size_t o, int n) {
  PolynomialExpansion p;
  p.input_dim = d;
  p.output_dim = o;
  p.max_degree = n;
  for (const Exponent& e : EnumerateExponents(d, n)) p.terms[e] = std::vector<double>(o, 0.0);
  return p;
}

double Std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

TEST_CASE("labels and number formatting") {
  CHECK(MonomialLabel({2, 0}) == "z1^2");
  CHECK(MonomialLabel({1, 1}) == "z1*z2");
  CHECK(MonomialLabel({0, 0, 3}) == "z3^3");
  CHECK(MonomialLabel({0, 0}) == "1");
  CHECK(FormatNumber(1.0) == "1.0");
  CHECK(FormatNumber(-0.03) == "-0.03");
  CHECK(FormatNumber(0.1) == "0.1");
  CHECK(FormatNumber(-0.0) == "0.0");
}

TEST_CASE("linear single-concept contribution is the textbook formula") {
  PolynomialExpansion p = EmptyPoly(1, 1, 1);
  p.terms[{0}] = {0.3};
  p.terms[{1}] = {2.0};
  std::mt19937_64 rng(1);
  const Matrix z = RandomMatrix(50, 1, rng);
  std::vector<double> y(50), zc(50);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < 50; ++i) {
    y[i] = nd(rng);
    zc[i] = z(i, 0);
  }
  const ContributionReport r =
      StandardizedContributions(p, z, Task::kRegression, y, {"a"}, {"y"});
  REQUIRE(r.entries.size() == 1);
  CHECK(RelativeError(r.entries[0].standardized[0], 2.0 * Std(zc) / Std(y)) < 1e-12);
  CHECK(r.ranking == std::vector<std::string>{"z1"});

  const std::vector<double> flat(50, 1.0);
  CHECK_THROWS_AS(StandardizedContributions(p, z, Task::kRegression, flat, {"a"}, {"y"}), Error);
}

TEST_CASE("zero model has an empty ranking but a full entry list") {
  const PolynomialExpansion p = EmptyPoly(6, 1, 2);
  std::mt19937_64 rng(2);
  const Matrix z = RandomMatrix(30, 6, rng);
  std::vector<double> y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = static_cast<double>(i);
  const ContributionReport r =
      StandardizedContributions(p, z, Task::kRegression, y, {"a", "b", "c", "d", "e", "f"}, {"y"});
  CHECK(r.entries.size() == 27);
  CHECK(r.ranking.empty());
  CHECK(RenderPolynomial(p, 2) == "0.0");
  CHECK(ContributionsSvg(r).find("all coefficients are zero") != std::string::npos);
}

TEST_CASE("ranking is invariant under joint rescaling") {
  std::mt19937_64 rng(3);
  PolynomialExpansion p = EmptyPoly(3, 1, 2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& [e, c] : p.terms) c[0] = u(rng);
  p.terms[{1, 0, 0}][0] = 0.5;
  p.terms[{0, 1, 0}][0] = 0.5;  // an exact tie in coefficient
  const Matrix z = RandomMatrix(40, 3, rng);
  std::vector<double> y(40);
  for (double& v : y) v = u(rng);
  const ContributionReport a = StandardizedContributions(p, z, Task::kRegression, y, {"a", "b", "c"}, {"y"});
  for (double scale : {4.0, 0.125, 3.0}) {
    PolynomialExpansion q = p;
    for (auto& [e, c] : q.terms) c[0] *= scale;
    std::vector<double> ys = y;
    for (double& v : ys) v *= scale;
    const ContributionReport b =
        StandardizedContributions(q, z, Task::kRegression, ys, {"a", "b", "c"}, {"y"});
    CHECK(a.ranking == b.ranking);
  }
}

TEST_CASE("classification contributions use centred logits") {
  PolynomialExpansion p = EmptyPoly(2, 2, 1);
  p.terms[{1, 0}] = {-1.0, 1.0};
  p.terms[{0, 1}] = {0.2, 0.2};  // shifts both logits equally: no effect
  std::mt19937_64 rng(4);
  const Matrix z = RandomMatrix(60, 2, rng);
  const ContributionReport r =
      StandardizedContributions(p, z, Task::kClassification, {}, {"a", "b"}, {"0", "1"});
  CHECK(r.ranking == std::vector<std::string>{"z1"});
  // Only z1 moves the logits, so its standardized effect is +-1.
  CHECK(r.entries[0].standardized[1] == doctest::Approx(1.0));
  CHECK(r.entries[0].standardized[0] == doctest::Approx(-1.0));
}

TEST_CASE("shape functions") {
  PolynomialExpansion p = EmptyPoly(2, 1, 2);
  p.terms[{1, 0}] = {0.69};
  p.terms[{2, 0}] = {0.02};
  p.terms[{1, 1}] = {5.0};
  p.terms[{0, 0}] = {-3.0};
  const std::vector<double> grid{1.0, -2.0};
  const Matrix s = ShapeFunction(p, 0, grid);
  CHECK(s(0, 0) == doctest::Approx(0.71).epsilon(1e-14));
  CHECK(s(1, 0) == doctest::Approx(-1.38 + 0.08));
  CHECK(ShapeFunction(EmptyPoly(2, 1, 2), 1, grid)(0, 0) == 0.0);
  CHECK_THROWS_AS(ShapeFunction(p, 2, grid), Error);
}

TEST_CASE("shape functions equal the forward restriction") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng() % 5, o = 1 + rng() % 3;
    const int order = 1 + static_cast<int>(rng() % 3);
    TaylorNet net = InitTaylorNet(d, o, RankConfig::Uniform(order, 1 + rng() % 4), rng());
    for (double& b : net.bias) b = 0.3;
    const PolynomialExpansion poly = ExpandMonomials(net);
    std::vector<double> grid{-1.7, -0.2, 0.0, 0.9, 2.4};
    Matrix zero(1, d);
    const Matrix base = Forward(net, zero);
    for (std::size_t m = 0; m < d; ++m) {
      const Matrix s = ShapeFunction(poly, m, grid);
      Matrix probe(grid.size(), d);
      for (std::size_t g = 0; g < grid.size(); ++g) probe(g, m) = grid[g];
      const Matrix f = Forward(net, probe);
      for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t c = 0; c < o; ++c)
          CHECK(RelativeError(s(g, c), f(g, c) - base(0, c), 1e-9) < 1e-9);
    }
  }
}

TEST_CASE("density bins") {
  const std::vector<double> same(10, 2.5);
  const Histogram c = DensityBins(same);
  CHECK(c.mass == std::vector<double>{1.0});

  std::vector<double> uniform;
  for (int i = 0; i < 25; ++i) uniform.push_back(i / 24.0);
  const Histogram u = DensityBins(uniform);
  REQUIRE(u.mass.size() == 25);
  REQUIRE(u.edges.size() == 26);
  for (double m : u.mass) CHECK(m == doctest::Approx(1.0 / 25));

  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  std::vector<double> normal(100);
  for (double& v : normal) v = nd(rng);
  const Histogram h = DensityBins(normal);
  CHECK(std::accumulate(h.mass.begin(), h.mass.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t b = 1; b < h.edges.size(); ++b) CHECK(h.edges[b] >= h.edges[b - 1]);
  // Bins covering the middle of the range versus the outer bins.
  double centre = 0.0, tails = 0.0;
  for (std::size_t b = 0; b < 25; ++b) {
    const double mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
    if (std::abs(mid) < 1.0) centre += h.mass[b];
    if (std::abs(mid) > 2.0) tails += h.mass[b];
  }
  CHECK(centre > tails);
  CHECK_THROWS_AS(DensityBins(std::vector<double>{}), Error);
}

TEST_CASE("polynomial rendering") {
  PolynomialExpansion c = EmptyPoly(2, 1, 2);
  c.terms[{0, 0}] = {-0.03};
  CHECK(RenderPolynomial(c, 2) == "-0.03");

  PolynomialExpansion t = c;
  t.terms[{2, 0}] = {0.5};
  t.terms[{1, 1}] = {1.0};
  t.terms[{0, 1}] = {0.004};  // rounds away
  CHECK(RenderPolynomial(t, 2) == "0.5*z1^2 + 1.0*z1*z2 - 0.03");
  CHECK(RenderPolynomial(t, 3) == "0.5*z1^2 + 1.0*z1*z2 + 0.004*z2 - 0.03");

  PolynomialExpansion m = EmptyPoly(2, 2, 1);
  m.terms[{1, 0}] = {0.25, -0.25};
  m.terms[{0, 0}] = {0.1, 0.0};
  CHECK(RenderPolynomial(m, 2, {"no", "yes"}) == "no: 0.25*z1 + 0.1\nyes: -0.25*z1\n");
  CHECK(RenderPolynomial(m, 2, {"no", "yes"}) == RenderPolynomial(m, 2, {"no", "yes"}));
}

TEST_CASE("generating monomials rank first on synthetic data") {
  std::mt19937_64 rng(7);
  auto make = [&](std::size_t n) {
    DataSplit s;
    s.x = RandomMatrix(n, 3, rng);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (std::size_t i = 0; i < n; ++i)
      s.y.push_back(1.5 * s.x(i, 0) * s.x(i, 1) - s.x(i, 2) * s.x(i, 2) + noise(rng));
    return s;
  };
  const DataSplit train = make(1500), val = make(200);
  ModelLayout layout;
  layout.num_features = 3;
  TrainConfig c;
  c.bypass_encoders = true;
  c.rank = 4;
  c.batch_size = 32;
  c.seed = 8;
  const TrainResult r = TrainFromScratch(layout, train, val, c);
  const PolynomialExpansion poly = ExpandMonomials(r.model.net);
  const ContributionReport rep = StandardizedContributions(
      poly, EncodeConcepts(r.model, val.x), Task::kRegression, val.y, {"a", "b", "c"}, {"y"});
  REQUIRE(rep.ranking.size() >= 2);
  const std::set<std::string> top{rep.ranking[0], rep.ranking[1]};
  CHECK(top == std::set<std::string>{"z1*z2", "z3^2"});
  CHECK(poly.terms.at({1, 1, 0})[0] > 0);
  CHECK(poly.terms.at({0, 0, 2})[0] < 0);

  const std::vector<ShapeFunctionTable> shapes =
      ShapeFunctions(poly, EncodeConcepts(r.model, val.x), {"a", "b", "c"});
  REQUIRE(shapes.size() == 3);
  CHECK(shapes[2].grid.size() == 200);
  CHECK(shapes[2].density.mass.size() == 25);
  CHECK(ShapesSvg(shapes).find("<polyline") != std::string::npos);
  CHECK(ShapesToCsv(shapes, {"y"}).rfind("concept,v,output,value\n", 0) == 0);
  CHECK(ContributionsToJson(rep)["entries"].size() == 9);
}

}  // namespace
}  // namespace cat
