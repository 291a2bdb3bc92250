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

// CatModel: concept encoders feeding a TaylorNet.

#ifndef CAT_MODEL_H_
#define CAT_MODEL_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cat/concept_encoder.h"
#include "cat/taylornet.h"

namespace cat {

enum class Task { kRegression, kClassification };

std::string_view TaskName(Task task);
Task ParseTask(std::string_view name);

// Everything needed to build a model besides the Taylor order and ranks.
struct ModelLayout {
  Task task = Task::kRegression;
  std::size_t num_outputs = 1;   // 1 for regression, #classes otherwise
  std::size_t num_features = 0;  // width of the preprocessed feature matrix
  std::vector<std::string> concept_names;
  std::vector<std::vector<std::size_t>> concept_columns;
  bool bypass = false;
  std::vector<std::size_t> hidden = DefaultHiddenWidths();
  double leaky_slope = kDefaultLeakySlope;

  // Width of the concept vector z.
  std::size_t concept_dim() const { return bypass ? num_features : concept_names.size(); }
};

struct CatModel {
  Task task = Task::kRegression;
  ConceptBank bank;
  TaylorNet net;
};

CatModel MakeCatModel(const ModelLayout& layout, const RankConfig& ranks,
                      double encoder_dropout, std::uint64_t seed);

CatModel ZerosLike(const CatModel& model);

// A learnable array. `decay` is false for biases and the Taylor bias, which
// are excluded from weight decay.
struct ParamRef {
  std::string name;
  std::span<double> values;
  bool decay = true;
};

// Stable order: encoders first (concept by concept, layer by layer), then the
// TaylorNet bias and terms.
std::vector<ParamRef> Parameters(CatModel& model);

std::size_t CountParams(const CatModel& model);

// Eval-mode concept vector and outputs.
Matrix EncodeConcepts(const CatModel& model, const Matrix& x);
Matrix Predict(const CatModel& model, const Matrix& x);

// State of a training-mode forward pass, consumed by BackwardModel.
struct ModelTape {
  EncodeResult encoded;
  Matrix taylor_input;  // z after TaylorNet dropout
  Matrix taylor_mask;   // empty when no dropout was applied
};

// Training-mode forward: encoder dropout, then inverted dropout on z.
Matrix ForwardTrain(const CatModel& model, const Matrix& x, double taylor_dropout,
                    std::mt19937_64& rng, ModelTape& tape);

// Gradients of sum <upstream, outputs> in the shape of the model.
CatModel BackwardModel(const CatModel& model, const ModelTape& tape, const Matrix& upstream);

}  // namespace cat

#endif  // CAT_MODEL_H_
