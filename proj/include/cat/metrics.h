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

#ifndef CAT_METRICS_H_
#define CAT_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cat {

struct EvalResult {
  std::string metric;
  double value = 0.0;
  std::vector<double> per_class;  // per-class F1 for macro_f1, else empty
  std::size_t count = 0;
};

double Rmse(std::span<const double> pred, std::span<const double> target);

double Accuracy(std::span<const int> pred, std::span<const int> truth);

// Unweighted mean of per-class F1. A class that is neither predicted nor
// present scores 0 and still counts toward the mean.
double MacroF1(std::span<const int> pred, std::span<const int> truth, int num_classes,
               std::vector<double>* per_class = nullptr);

}  // namespace cat

#endif  // CAT_METRICS_H_
