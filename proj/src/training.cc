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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "cat/error.h"
#include "cat/metrics.h"

namespace cat {

namespace {

void CheckBatch(const Matrix& pred, std::size_t n) {
  if (pred.rows() != n)
    Fail(ErrorKind::kShape, "prediction rows " + std::to_string(pred.rows()) +
                                " != target length " + std::to_string(n));
  if (n == 0) Fail(ErrorKind::kInvalidArgument, "loss over an empty batch");
}

int LabelAt(std::span<const double> labels, std::size_t i, std::size_t classes) {
  const double v = labels[i];
  if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(classes))
    Fail(ErrorKind::kInvalidArgument, "label " + std::to_string(v) + " at row " +
                                          std::to_string(i) + " outside [0, " +
                                          std::to_string(classes) + ")");
  return static_cast<int>(v);
}

std::mt19937_64 Stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  return std::mt19937_64(seq);
}

Matrix GatherRows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

LossResult MseLoss(const Matrix& pred, std::span<const double> target) {
  CheckBatch(pred, target.size());
  if (pred.cols() != 1)
    Fail(ErrorKind::kShape, "regression expects one output, got " + std::to_string(pred.cols()));
  const double n = static_cast<double>(target.size());
  LossResult r;
  r.grad = Matrix(pred.rows(), 1);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = pred(i, 0) - target[i];
    r.value += e * e;
    r.grad(i, 0) = 2.0 * e / n;
  }
  r.value /= n;
  return r;
}

LossResult SoftmaxCrossEntropy(const Matrix& logits, std::span<const double> labels) {
  CheckBatch(logits, labels.size());
  const double n = static_cast<double>(labels.size());
  const std::size_t k = logits.cols();
  LossResult r;
  r.grad = Matrix(logits.rows(), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = LabelAt(labels, i, k);
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    r.value += log_z - row[y];
    auto g = r.grad.row(i);
    for (std::size_t c = 0; c < k; ++c) g[c] = std::exp(row[c] - log_z) / n;
    g[y] -= 1.0 / n;
  }
  r.value /= n;
  return r;
}

AdamWState MakeAdamWState(const std::vector<ParamRef>& params, AdamWOptions options) {
  AdamWState s;
  s.options = options;
  for (const ParamRef& p : params) {
    s.m.emplace_back(p.values.size(), 0.0);
    s.v.emplace_back(p.values.size(), 0.0);
  }
  return s;
}

void AdamWStep(std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
               AdamWState& state, double lr, double weight_decay) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    Fail(ErrorKind::kShape, "optimizer state does not match the parameter list");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].values.size() != grads[p].values.size() ||
        params[p].values.size() != state.m[p].size())
      Fail(ErrorKind::kShape, "gradient shape mismatch for " + params[p].name);
    for (std::size_t i = 0; i < grads[p].values.size(); ++i) {
      if (!std::isfinite(grads[p].values[i]))
        Fail(ErrorKind::kNumerical, "non-finite gradient in " + params[p].name + "[" +
                                        std::to_string(i) + "]");
    }
  }
  const AdamWOptions& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::span<double> w = params[p].values;
    std::span<const double> g = grads[p].values;
    std::vector<double>& m = state.m[p];
    std::vector<double>& v = state.v[p];
    const double decay = params[p].decay ? 1.0 - lr * weight_decay : 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] *= decay;
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + o.eps);
    }
  }
}

std::size_t TrainConfig::EffectiveRank() const {
  if (rank > 0) return rank;
  return order <= 2 ? 8 : 16;
}

RankConfig TrainConfig::Ranks() const { return RankConfig::Uniform(order, EffectiveRank()); }

void ValidateTrainConfig(const TrainConfig& c) {
  auto bad = [](const std::string& what) { Fail(ErrorKind::kInvalidArgument, what); };
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate))
    bad("learning rate must be positive");
  if (!(c.weight_decay >= 0.0)) bad("weight decay must be >= 0");
  if (!(c.dropout_encoder >= 0.0 && c.dropout_encoder < 1.0))
    bad("encoder dropout must lie in [0, 1)");
  if (!(c.dropout_taylor >= 0.0 && c.dropout_taylor < 1.0))
    bad("TaylorNet dropout must lie in [0, 1)");
  if (c.batch_size == 0) bad("batch size must be >= 1");
  if (c.max_epochs < 1) bad("max epochs must be >= 1");
  if (c.patience < 0) bad("patience must be >= 0");
  if (c.order < 1) bad("order must be >= 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"task", std::string(TaskName(c.task))},
                     {"learning_rate", c.learning_rate},
                     {"weight_decay", c.weight_decay},
                     {"dropout_encoder", c.dropout_encoder},
                     {"dropout_taylor", c.dropout_taylor},
                     {"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"patience", c.patience},
                     {"seed", c.seed},
                     {"order", c.order},
                     {"rank", c.rank},
                     {"bypass_encoders", c.bypass_encoders}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) Fail(ErrorKind::kParse, "training config must be a JSON object");
  static const std::set<std::string> known{
      "task",     "learning_rate", "weight_decay", "dropout_encoder", "dropout_taylor",
      "batch_size", "max_epochs",  "patience",     "seed",            "order",
      "rank",     "bypass_encoders"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) Fail(ErrorKind::kParse, "unknown training config key '" + key + "'");
  }
  try {
    if (j.contains("task")) c.task = ParseTask(j.at("task").get<std::string>());
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("learning_rate", c.learning_rate);
    get("weight_decay", c.weight_decay);
    get("dropout_encoder", c.dropout_encoder);
    get("dropout_taylor", c.dropout_taylor);
    get("batch_size", c.batch_size);
    get("max_epochs", c.max_epochs);
    get("patience", c.patience);
    get("seed", c.seed);
    get("order", c.order);
    get("rank", c.rank);
    get("bypass_encoders", c.bypass_encoders);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("training config: ") + e.what());
  }
}

std::vector<int> PredictClasses(const CatModel& model, const Matrix& x) {
  const Matrix logits = Predict(model, x);
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double ValidationMetric(const CatModel& model, const DataSplit& split) {
  if (model.task == Task::kRegression) {
    const Matrix pred = Predict(model, split.x);
    std::vector<double> p(pred.rows());
    for (std::size_t i = 0; i < pred.rows(); ++i) p[i] = pred(i, 0);
    return Rmse(p, split.y);
  }
  const std::vector<int> pred = PredictClasses(model, split.x);
  std::vector<int> truth(split.y.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(split.y[i]);
  return Accuracy(pred, truth);
}

bool MetricBetter(Task task, double a, double b) {
  return task == Task::kRegression ? a < b : a > b;
}

TrainResult Train(CatModel model, const DataSplit& train, const DataSplit& val,
                  const TrainConfig& config) {
  ValidateTrainConfig(config);
  if (train.x.rows() == 0 || val.x.rows() == 0)
    Fail(ErrorKind::kInvalidArgument, "training and validation splits must be nonempty");
  if (train.x.rows() != train.y.size() || val.x.rows() != val.y.size())
    Fail(ErrorKind::kShape, "feature rows and targets differ in count");
  if (config.task != model.task)
    Fail(ErrorKind::kInvalidArgument, "config task does not match the model");

  std::mt19937_64 shuffle_rng = Stream(config.seed, 1);
  std::mt19937_64 dropout_rng = Stream(config.seed, 2);
  std::vector<ParamRef> params = Parameters(model);
  AdamWState opt = MakeAdamWState(params);

  TrainResult result;
  result.model = model;
  bool have_best = false;
  int bad_epochs = 0;
  std::vector<std::size_t> order(train.x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Matrix xb = GatherRows(train.x, rows);
      std::vector<double> yb(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) yb[i] = train.y[rows[i]];

      ModelTape tape;
      const Matrix out = ForwardTrain(model, xb, config.dropout_taylor, dropout_rng, tape);
      const LossResult loss =
          config.task == Task::kRegression ? MseLoss(out, yb) : SoftmaxCrossEntropy(out, yb);
      if (!std::isfinite(loss.value))
        Fail(ErrorKind::kNumerical, "training diverged: non-finite loss at epoch " +
                                        std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index + 1));
      loss_sum += loss.value * static_cast<double>(rows.size());
      CatModel grad = BackwardModel(model, tape, loss.grad);
      const std::vector<ParamRef> grad_refs = Parameters(grad);
      AdamWStep(params, grad_refs, opt, config.learning_rate, config.weight_decay);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_metric = ValidationMetric(model, val);
    rec.lr = config.learning_rate;
    result.history.push_back(rec);
    if (!std::isfinite(rec.val_metric))
      Fail(ErrorKind::kNumerical,
           "training diverged: non-finite validation metric at epoch " + std::to_string(epoch));

    if (!have_best || MetricBetter(config.task, rec.val_metric, result.best_val_metric)) {
      have_best = true;
      result.model = model;
      result.best_epoch = epoch;
      result.best_val_metric = rec.val_metric;
      bad_epochs = 0;
    } else if (++bad_epochs > config.patience) {
      break;
    }
  }
  return result;
}

TrainResult TrainFromScratch(ModelLayout layout, const DataSplit& train, const DataSplit& val,
                             const TrainConfig& config) {
  ValidateTrainConfig(config);
  layout.task = config.task;
  layout.bypass = config.bypass_encoders;
  CatModel model = MakeCatModel(layout, config.Ranks(), config.dropout_encoder, config.seed);
  return Train(std::move(model), train, val, config);
}

void to_json(nlohmann::json& j, const GridSpec& g) {
  j = nlohmann::json{{"orders", g.orders},
                     {"ranks", g.ranks},
                     {"learning_rates", g.learning_rates},
                     {"dropout_encoder", g.dropout_encoder},
                     {"dropout_taylor", g.dropout_taylor}};
}

void from_json(const nlohmann::json& j, GridSpec& g) {
  if (!j.is_object()) Fail(ErrorKind::kParse, "grid must be a JSON object");
  static const std::set<std::string> known{"orders", "ranks", "learning_rates",
                                           "dropout_encoder", "dropout_taylor"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) Fail(ErrorKind::kParse, "unknown grid key '" + key + "'");
  }
  try {
    if (j.contains("orders")) j.at("orders").get_to(g.orders);
    if (j.contains("ranks")) j.at("ranks").get_to(g.ranks);
    if (j.contains("learning_rates")) j.at("learning_rates").get_to(g.learning_rates);
    if (j.contains("dropout_encoder")) j.at("dropout_encoder").get_to(g.dropout_encoder);
    if (j.contains("dropout_taylor")) j.at("dropout_taylor").get_to(g.dropout_taylor);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("grid: ") + e.what());
  }
}

std::vector<TrainConfig> ExpandGrid(const TrainConfig& base, const GridSpec& grid) {
  auto or_base = [](auto axis, auto value) {
    if (axis.empty()) axis.push_back(value);
    return axis;
  };
  std::vector<TrainConfig> out;
  for (int order : or_base(grid.orders, base.order))
    for (std::size_t rank : or_base(grid.ranks, base.rank))
      for (double lr : or_base(grid.learning_rates, base.learning_rate))
        for (double de : or_base(grid.dropout_encoder, base.dropout_encoder))
          for (double dt : or_base(grid.dropout_taylor, base.dropout_taylor)) {
            TrainConfig c = base;
            c.order = order;
            c.rank = rank;
            c.learning_rate = lr;
            c.dropout_encoder = de;
            c.dropout_taylor = dt;
            out.push_back(c);
          }
  return out;
}

void SortLeaderboard(std::vector<GridCell>& cells, Task task) {
  std::stable_sort(cells.begin(), cells.end(), [task](const GridCell& a, const GridCell& b) {
    if (a.failed != b.failed) return b.failed;
    if (a.failed) return a.index < b.index;
    if (a.val_metric != b.val_metric) return MetricBetter(task, a.val_metric, b.val_metric);
    if (a.param_count != b.param_count) return a.param_count < b.param_count;
    return a.index < b.index;
  });
}

GridResult GridSearch(const ModelLayout& layout, const DataSplit& train, const DataSplit& val,
                      const std::vector<TrainConfig>& configs, int threads) {
  std::vector<GridCell> cells(configs.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    GridCell& cell = cells[i];
    cell.index = static_cast<std::size_t>(i);
    cell.config = configs[i];
    try {
      TrainResult r = TrainFromScratch(layout, train, val, configs[i]);
      cell.val_metric = r.best_val_metric;
      cell.param_count = CountParams(r.model);
      cell.epochs = static_cast<int>(r.history.size());
      cell.best_epoch = r.best_epoch;
      cell.result = std::move(r);
    } catch (const Error& e) {
      cell.failed = true;
      cell.error = std::string(ErrorKindName(e.kind())) + ": " + e.what();
    }
  }
  SortLeaderboard(cells, configs.empty() ? layout.task : configs.front().task);
  GridResult result;
  result.leaderboard = std::move(cells);
  return result;
}

}  // namespace cat
