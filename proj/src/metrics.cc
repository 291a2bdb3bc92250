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

#include "cat/metrics.h"

#include <cmath>
#include <string>

#include "cat/error.h"

namespace cat {

namespace {

void CheckLengths(std::size_t a, std::size_t b) {
  if (a != b)
    Fail(ErrorKind::kShape, "length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  if (a == 0) Fail(ErrorKind::kInvalidArgument, "metric over an empty sample");
}

}  // namespace

double Rmse(std::span<const double> pred, std::span<const double> target) {
  CheckLengths(pred.size(), target.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double Accuracy(std::span<const int> pred, std::span<const int> truth) {
  CheckLengths(pred.size(), truth.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double MacroF1(std::span<const int> pred, std::span<const int> truth, int num_classes,
               std::vector<double>* per_class) {
  CheckLengths(pred.size(), truth.size());
  if (num_classes < 1) Fail(ErrorKind::kInvalidArgument, "need at least one class");
  std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i], t = truth[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes)
      Fail(ErrorKind::kInvalidArgument, "label outside [0, " + std::to_string(num_classes) + ")");
    if (p == t) {
      tp[p] += 1;
    } else {
      fp[p] += 1;
      fn[t] += 1;
    }
  }
  std::vector<double> f1(num_classes, 0.0);
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    // 2PR/(P+R) == 2tp / (2tp + fp + fn); zero when tp is zero.
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    f1[c] = denom > 0 ? 2 * tp[c] / denom : 0.0;
    sum += f1[c];
  }
  if (per_class) *per_class = f1;
  return sum / num_classes;
}

}  // namespace cat
