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

#include "cat/training.h"

#include <cmath>
#include <random>

#include "cat/error.h"
#include "doctest.h"
#include "test_util.h"

namespace cat {
namespace {

using test::CentralDifferences;
using test::MaxRelativeError;
using test::RandomMatrix;

ModelLayout TinyLayout(Task task, std::size_t outputs) {
  ModelLayout layout;
  layout.task = task;
  layout.num_outputs = outputs;
  layout.num_features = 4;
  layout.concept_names = {"g1", "g2"};
  layout.concept_columns = {{0, 1}, {2, 3}};
  layout.hidden = {6, 5, 4};
  return layout;
}

// y = 0.5 + x . w with a little noise.
DataSplit LinearData(std::size_t n, std::mt19937_64& rng, double noise = 0.0) {
  DataSplit s;
  s.x = RandomMatrix(n, 3, rng);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double y = 0.5 + 1.5 * s.x(i, 0) - 2.0 * s.x(i, 1) + 0.7 * s.x(i, 2);
    if (noise > 0) y += eps(rng);
    s.y.push_back(y);
  }
  return s;
}

// y = x0 * x1 + x2^2, which needs order 2.
DataSplit QuadraticData(std::size_t n, std::mt19937_64& rng) {
  DataSplit s;
  s.x = RandomMatrix(n, 3, rng);
  for (std::size_t i = 0; i < n; ++i)
    s.y.push_back(s.x(i, 0) * s.x(i, 1) + s.x(i, 2) * s.x(i, 2));
  return s;
}

ModelLayout BypassLayout(std::size_t features) {
  ModelLayout layout;
  layout.num_features = features;
  layout.bypass = true;
  return layout;
}

TEST_CASE("mse loss") {
  Matrix p(1, 1);
  p(0, 0) = 1.0;
  std::vector<double> t{0.0};
  LossResult r = MseLoss(p, t);
  CHECK(r.value == 1.0);
  CHECK(r.grad(0, 0) == 2.0);

  t = {1.0};
  r = MseLoss(p, t);
  CHECK(r.value == 0.0);
  CHECK(r.grad(0, 0) == 0.0);

  Matrix p3(3, 1);
  p3(0, 0) = 1;
  p3(1, 0) = 2;
  p3(2, 0) = 3;
  std::vector<double> t3{0, 0, 6};
  r = MseLoss(p3, t3);
  CHECK(r.value == doctest::Approx(14.0 / 3.0));
  CHECK(r.grad(2, 0) == doctest::Approx(-2.0));

  CHECK_THROWS_AS(MseLoss(p3, t), Error);
}

TEST_CASE("softmax cross-entropy") {
  Matrix u(1, 2);
  std::vector<double> y0{0.0};
  CHECK(SoftmaxCrossEntropy(u, y0).value == doctest::Approx(std::log(2.0)));

  Matrix l(1, 2);
  l(0, 0) = 10;
  l(0, 1) = -10;
  const double v = SoftmaxCrossEntropy(l, y0).value;
  CHECK(v == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-6));
  CHECK(v == doctest::Approx(2.06e-9).epsilon(1e-2));

  Matrix big(1, 2);
  big(0, 0) = 1000;
  CHECK(std::isfinite(SoftmaxCrossEntropy(big, std::vector<double>{1.0}).value));

  std::mt19937_64 rng(1);
  Matrix logits = RandomMatrix(5, 3, rng, 2.0);
  std::vector<double> labels{0, 2, 1, 1, 0};
  const LossResult r = SoftmaxCrossEntropy(logits, labels);
  const std::vector<double> fd = CentralDifferences(
      logits.data(), [&] { return SoftmaxCrossEntropy(logits, labels).value; });
  CHECK(MaxRelativeError(r.grad.data(), fd, 1e-6) < 1e-6);

  CHECK_THROWS_AS(SoftmaxCrossEntropy(logits, std::vector<double>{0, 3, 1, 1, 0}), Error);
  CHECK_THROWS_AS(SoftmaxCrossEntropy(logits, std::vector<double>{0, 0.5, 1, 1, 0}), Error);
}

TEST_CASE("adamw step") {
  std::vector<double> w{1.0}, g{1.0};
  std::vector<ParamRef> params{{"w", w, true}};
  std::vector<ParamRef> grads{{"w", g, true}};
  AdamWState s = MakeAdamWState(params);
  AdamWStep(params, grads, s, 0.1, 0.0);
  CHECK(w[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(s.step == 1);

  SUBCASE("zero gradients leave parameters and moments unchanged") {
    std::vector<double> a{0.3, -2.0}, ga{0.0, 0.0};
    std::vector<ParamRef> pa{{"a", a, true}}, gra{{"a", ga, true}};
    AdamWState sa = MakeAdamWState(pa);
    AdamWStep(pa, gra, sa, 0.1, 0.0);
    CHECK(a == std::vector<double>{0.3, -2.0});
    CHECK(sa.m[0] == std::vector<double>{0.0, 0.0});
    CHECK(sa.v[0] == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("decoupled decay only touches decayed parameters") {
    std::vector<double> a{2.0}, b{2.0}, z{0.0};
    std::vector<ParamRef> pa{{"a", a, true}, {"b", b, false}};
    std::vector<ParamRef> gz{{"a", z, true}, {"b", z, false}};
    AdamWState sa = MakeAdamWState(pa);
    AdamWStep(pa, gz, sa, 0.1, 0.5);
    CHECK(a[0] == doctest::Approx(2.0 * (1 - 0.1 * 0.5)));
    CHECK(b[0] == 2.0);
  }
  SUBCASE("lr zero changes nothing") {
    std::vector<double> a{0.7, 1.1}, ga{3.0, -4.0};
    std::vector<ParamRef> pa{{"a", a, true}}, gra{{"a", ga, true}};
    AdamWState sa = MakeAdamWState(pa);
    AdamWStep(pa, gra, sa, 0.0, 0.0);
    CHECK(a == std::vector<double>{0.7, 1.1});
  }
  SUBCASE("non-finite gradient names the parameter") {
    std::vector<double> a{1.0}, b{1.0}, ga{0.5}, gb{NAN};
    std::vector<ParamRef> pa{{"first", a, true}, {"second.weight", b, true}};
    std::vector<ParamRef> gr{{"first", ga, true}, {"second.weight", gb, true}};
    AdamWState sa = MakeAdamWState(pa);
    try {
      AdamWStep(pa, gr, sa, 0.1, 0.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNumerical);
      CHECK(std::string(e.what()).find("second.weight") != std::string::npos);
    }
    CHECK(a[0] == 1.0);
  }
}

double LossOf(const CatModel& model, const Matrix& x, const std::vector<double>& y,
              double dropout_taylor, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelTape tape;
  const Matrix out = ForwardTrain(model, x, dropout_taylor, rng, tape);
  return model.task == Task::kRegression ? MseLoss(out, y).value
                                         : SoftmaxCrossEntropy(out, y).value;
}

void CheckEndToEndGradient(Task task, std::size_t outputs, double enc_drop, double taylor_drop) {
  std::mt19937_64 rng(11);
  CatModel model = MakeCatModel(TinyLayout(task, outputs), RankConfig::Uniform(2, 2), enc_drop, 5);
  std::uniform_real_distribution<double> dist(-0.3, 0.3);
  for (double& b : model.net.bias) b = dist(rng);
  const Matrix x = RandomMatrix(7, 4, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < 7; ++i)
    y.push_back(task == Task::kRegression ? dist(rng) : static_cast<double>(i % outputs));

  std::mt19937_64 mask_rng(21);
  ModelTape tape;
  const Matrix out = ForwardTrain(model, x, taylor_drop, mask_rng, tape);
  const LossResult loss =
      task == Task::kRegression ? MseLoss(out, y) : SoftmaxCrossEntropy(out, y);
  CatModel grad = BackwardModel(model, tape, loss.grad);

  std::vector<ParamRef> params = Parameters(model);
  std::vector<ParamRef> grads = Parameters(grad);
  REQUIRE(params.size() == grads.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::vector<double> fd =
        CentralDifferences(params[p].values, [&] { return LossOf(model, x, y, taylor_drop, 21); });
    INFO(params[p].name);
    CHECK(MaxRelativeError(grads[p].values, fd, 1e-3) < 1e-3);
  }
}

TEST_CASE("end-to-end gradients match finite differences") {
  SUBCASE("regression") { CheckEndToEndGradient(Task::kRegression, 1, 0.0, 0.0); }
  SUBCASE("classification") { CheckEndToEndGradient(Task::kClassification, 3, 0.0, 0.0); }
  SUBCASE("with dropout") { CheckEndToEndGradient(Task::kRegression, 1, 0.2, 0.3); }
}

TEST_CASE("parameter listing covers every weight once") {
  CatModel model = MakeCatModel(TinyLayout(Task::kRegression, 1), RankConfig::Uniform(2, 2), 0, 1);
  std::size_t expected = CountParams(model.bank);
  expected += CountParams(2, 1, RankConfig::Uniform(2, 2)).total;
  CHECK(CountParams(model) == expected);
  for (const ParamRef& p : Parameters(model)) {
    const bool is_bias = p.name.find("bias") != std::string::npos;
    CHECK(p.decay == !is_bias);
  }
}

TEST_CASE("linear data is recovered with a first-order bypass model") {
  std::mt19937_64 rng(3);
  const DataSplit train = LinearData(800, rng);
  const DataSplit val = LinearData(100, rng);
  TrainConfig c;
  c.order = 1;
  c.bypass_encoders = true;
  c.batch_size = 32;
  c.learning_rate = 1e-2;
  c.weight_decay = 0.0;
  c.seed = 4;
  const TrainResult r = TrainFromScratch(BypassLayout(3), train, val, c);
  CHECK(r.history.size() <= 100);
  CHECK(r.best_val_metric < 0.05);
  CHECK(ValidationMetric(r.model, val) == r.best_val_metric);
}

TEST_CASE("early stopping contract") {
  std::mt19937_64 rng(5);
  const DataSplit train = LinearData(200, rng, 0.5);
  const DataSplit val = LinearData(40, rng, 0.5);
  for (int patience : {0, 2}) {
    TrainConfig c;
    c.order = 1;
    c.bypass_encoders = true;
    c.batch_size = 16;
    c.learning_rate = 5e-2;
    c.patience = patience;
    c.seed = 6;
    c.max_epochs = 100;
    const TrainResult r = TrainFromScratch(BypassLayout(3), train, val, c);
    REQUIRE(static_cast<int>(r.history.size()) < c.max_epochs);
    // The run ends exactly patience + 1 epochs after the best one.
    CHECK(static_cast<int>(r.history.size()) == r.best_epoch + patience + 1);
    for (const EpochRecord& e : r.history) CHECK(r.best_val_metric <= e.val_metric);
    CHECK(ValidationMetric(r.model, val) == r.best_val_metric);
    if (patience == 0) {
      // Every epoch before the stop improved on its predecessor.
      for (std::size_t i = 1; i + 1 < r.history.size(); ++i)
        CHECK(r.history[i].val_metric < r.history[i - 1].val_metric);
    }
  }
}

TEST_CASE("training is reproducible") {
  std::mt19937_64 rng(7);
  DataSplit train, val;
  train.x = RandomMatrix(120, 4, rng);
  val.x = RandomMatrix(30, 4, rng);
  for (std::size_t i = 0; i < 120; ++i) train.y.push_back(train.x(i, 0) * train.x(i, 3));
  for (std::size_t i = 0; i < 30; ++i) val.y.push_back(val.x(i, 0) * val.x(i, 3));
  TrainConfig c;
  c.max_epochs = 5;
  c.batch_size = 32;
  c.dropout_encoder = 0.1;
  c.dropout_taylor = 0.1;
  c.rank = 3;
  c.seed = 8;
  const TrainResult a = TrainFromScratch(TinyLayout(Task::kRegression, 1), train, val, c);
  const TrainResult b = TrainFromScratch(TinyLayout(Task::kRegression, 1), train, val, c);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].val_metric == b.history[i].val_metric);
  }
  CatModel ma = a.model, mb = b.model;
  auto pa = Parameters(ma), pb = Parameters(mb);
  for (std::size_t p = 0; p < pa.size(); ++p)
    CHECK(std::equal(pa[p].values.begin(), pa[p].values.end(), pb[p].values.begin()));
}

TEST_CASE("divergence aborts with the epoch and batch") {
  std::mt19937_64 rng(9);
  const DataSplit train = QuadraticData(64, rng);
  const DataSplit val = QuadraticData(16, rng);
  TrainConfig c;
  c.bypass_encoders = true;
  c.learning_rate = 1e200;
  c.batch_size = 16;
  try {
    TrainFromScratch(BypassLayout(3), train, val, c);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumerical);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("config json round trip") {
  TrainConfig c;
  c.task = Task::kClassification;
  c.learning_rate = 0.003;
  c.dropout_taylor = 0.2;
  c.order = 3;
  c.rank = 5;
  c.seed = 42;
  c.bypass_encoders = true;
  const nlohmann::json j = c;
  const TrainConfig d = j.get<TrainConfig>();
  CHECK(nlohmann::json(d) == j);
  CHECK(d.EffectiveRank() == 5);
  TrainConfig e;
  e.order = 3;
  CHECK(e.EffectiveRank() == 16);
  e.order = 2;
  CHECK(e.EffectiveRank() == 8);
  CHECK_THROWS_AS(nlohmann::json({{"lr", 0.1}}).get<TrainConfig>(), Error);
  CHECK_THROWS_AS(nlohmann::json({{"order", "two"}}).get<TrainConfig>(), Error);
}

TEST_CASE("grid search") {
  std::mt19937_64 rng(12);
  const DataSplit train = QuadraticData(400, rng);
  const DataSplit val = QuadraticData(80, rng);
  TrainConfig base;
  base.bypass_encoders = true;
  base.batch_size = 32;
  base.max_epochs = 40;
  base.learning_rate = 2e-2;
  base.seed = 13;
  const ModelLayout layout = BypassLayout(3);

  SUBCASE("one cell") {
    const GridResult g = GridSearch(layout, train, val, {base});
    REQUIRE(g.leaderboard.size() == 1);
    CHECK(!g.leaderboard[0].failed);
    CHECK(nlohmann::json(g.leaderboard[0].config) == nlohmann::json(base));
  }
  SUBCASE("a diverging cell is reported, not fatal") {
    TrainConfig bad = base;
    bad.learning_rate = 1e200;
    const GridResult g = GridSearch(layout, train, val, {bad, base});
    REQUIRE(g.leaderboard.size() == 2);
    CHECK(!g.leaderboard[0].failed);
    CHECK(g.leaderboard[0].index == 1);
    CHECK(g.leaderboard[1].failed);
    CHECK(g.leaderboard[1].error.find("NUMERICAL_FAILURE") != std::string::npos);
  }
  SUBCASE("2x2 grid is sorted and order 2 beats order 1") {
    GridSpec spec;
    spec.orders = {1, 2};
    spec.ranks = {2, 4};
    const std::vector<TrainConfig> configs = ExpandGrid(base, spec);
    REQUIRE(configs.size() == 4);
    CHECK(configs[1].order == 1);
    CHECK(configs[1].rank == 4);
    const GridResult serial = GridSearch(layout, train, val, configs, 1);
    const GridResult parallel = GridSearch(layout, train, val, configs, 3);
    for (std::size_t i = 1; i < serial.leaderboard.size(); ++i)
      CHECK(serial.leaderboard[i - 1].val_metric <= serial.leaderboard[i].val_metric);
    CHECK(serial.leaderboard[0].config.order == 2);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(serial.leaderboard[i].index == parallel.leaderboard[i].index);
      CHECK(serial.leaderboard[i].val_metric == parallel.leaderboard[i].val_metric);
    }
  }
}

TEST_CASE("leaderboard tie-breaks") {
  auto cell = [](std::size_t index, double metric, std::size_t params, bool failed = false) {
    GridCell c;
    c.index = index;
    c.val_metric = metric;
    c.param_count = params;
    c.failed = failed;
    return c;
  };
  std::vector<GridCell> cells{cell(0, 0.5, 100), cell(1, 0.0, 0, true), cell(2, 0.4, 300),
                              cell(3, 0.4, 200), cell(4, 0.4, 200)};
  SortLeaderboard(cells, Task::kRegression);
  std::vector<std::size_t> order;
  for (const GridCell& c : cells) order.push_back(c.index);
  CHECK(order == std::vector<std::size_t>{3, 4, 2, 0, 1});
  SortLeaderboard(cells, Task::kClassification);
  order.clear();
  for (const GridCell& c : cells) order.push_back(c.index);
  CHECK(order == std::vector<std::size_t>{0, 3, 4, 2, 1});
}

}  // namespace
}  // namespace cat
