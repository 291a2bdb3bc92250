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

// Losses, AdamW, the training loop and grid search.

#ifndef CAT_TRAINING_H_
#define CAT_TRAINING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cat/model.h"
#include "json.hpp"

namespace cat {

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d loss / d pred
};

// Mean over the batch of the squared error; pred must have one column.
LossResult MseLoss(const Matrix& pred, std::span<const double> target);

// Mean negative log-likelihood of integer labels stored as doubles.
LossResult SoftmaxCrossEntropy(const Matrix& logits, std::span<const double> labels);

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamWState {
  std::vector<std::vector<double>> m, v;
  std::int64_t step = 0;
  AdamWOptions options;
};

AdamWState MakeAdamWState(const std::vector<ParamRef>& params, AdamWOptions options = {});

// Decoupled decay (p *= 1 - lr * wd, only where ParamRef::decay) followed by
// the bias-corrected Adam update. Throws kNumerical naming the parameter when
// a gradient is not finite; nothing is modified in that case.
void AdamWStep(std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
               AdamWState& state, double lr, double weight_decay);

struct TrainConfig {
  Task task = Task::kRegression;
  double learning_rate = 1e-2;
  double weight_decay = 1e-4;
  double dropout_encoder = 0.0;
  double dropout_taylor = 0.0;
  std::size_t batch_size = 256;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 0;
  int order = 2;
  // Uniform rank; 0 picks the default for the order (8 up to order 2, else 16).
  std::size_t rank = 0;
  bool bypass_encoders = false;

  std::size_t EffectiveRank() const;
  RankConfig Ranks() const;
};

// Throws kInvalidArgument describing the first bad field.
void ValidateTrainConfig(const TrainConfig& config);

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct DataSplit {
  Matrix x;
  std::vector<double> y;  // regression targets or class indices
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_metric = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  CatModel model;  // best-validation snapshot
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_metric = 0.0;
};

// RMSE for regression, accuracy for classification.
double ValidationMetric(const CatModel& model, const DataSplit& split);
std::vector<int> PredictClasses(const CatModel& model, const Matrix& x);

// True when `a` is strictly better than `b` for the task's metric.
bool MetricBetter(Task task, double a, double b);

// Trains `model` in place from its current parameters. Stops once the
// validation metric has failed to improve for more than `patience`
// consecutive epochs. Throws kNumerical on a non-finite loss.
TrainResult Train(CatModel model, const DataSplit& train, const DataSplit& val,
                  const TrainConfig& config);

// Builds a fresh model for `config` (seeded by config.seed) and trains it.
TrainResult TrainFromScratch(ModelLayout layout, const DataSplit& train, const DataSplit& val,
                             const TrainConfig& config);

// Axes of the search; an empty axis keeps the base config's value.
struct GridSpec {
  std::vector<int> orders;
  std::vector<std::size_t> ranks;
  std::vector<double> learning_rates;
  std::vector<double> dropout_encoder;
  std::vector<double> dropout_taylor;
};

void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);

// Cartesian product in a fixed order (orders outermost, dropout_taylor
// innermost).
std::vector<TrainConfig> ExpandGrid(const TrainConfig& base, const GridSpec& grid);

struct GridCell {
  std::size_t index = 0;  // position in ExpandGrid order
  TrainConfig config;
  bool failed = false;
  std::string error;
  double val_metric = 0.0;
  std::size_t param_count = 0;
  int epochs = 0;
  int best_epoch = 0;
  std::optional<TrainResult> result;
};

struct GridResult {
  std::vector<GridCell> leaderboard;  // best first; failed cells last
  bool any_succeeded() const { return !leaderboard.empty() && !leaderboard.front().failed; }
};

// Best metric first, then fewer parameters, then lower index; failed cells
// last in index order.
void SortLeaderboard(std::vector<GridCell>& cells, Task task);

// Cells may run concurrently (`threads` > 1); the leaderboard does not depend
// on scheduling. Ties in the metric go to the smaller model, then the earlier
// cell.
GridResult GridSearch(const ModelLayout& layout, const DataSplit& train, const DataSplit& val,
                      const std::vector<TrainConfig>& configs, int threads = 1);

}  // namespace cat

#endif  // CAT_TRAINING_H_
