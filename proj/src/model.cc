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

#include "cat/model.h"

#include <string>
#include <utility>

#include "cat/error.h"

namespace cat {

std::string_view TaskName(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Task ParseTask(std::string_view name) {
  if (name == "regression") return Task::kRegression;
  if (name == "classification") return Task::kClassification;
  Fail(ErrorKind::kSpecInvalid, "unknown task '" + std::string(name) +
                                    "' (expected regression or classification)");
}

CatModel MakeCatModel(const ModelLayout& layout, const RankConfig& ranks,
                      double encoder_dropout, std::uint64_t seed) {
  if (layout.num_outputs == 0 || layout.num_features == 0)
    Fail(ErrorKind::kInvalidArgument, "model needs at least one feature and one output");
  if (!layout.bypass && layout.concept_names.size() != layout.concept_columns.size())
    Fail(ErrorKind::kInvalidArgument, "concept names and column groups differ in count");

  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  CatModel model;
  model.task = layout.task;
  model.bank.bypass = layout.bypass;
  model.bank.bypass_width = layout.bypass ? layout.num_features : 0;
  if (!layout.bypass) {
    for (std::size_t m = 0; m < layout.concept_names.size(); ++m) {
      Concept c;
      c.name = layout.concept_names[m];
      c.columns = layout.concept_columns[m];
      for (std::size_t col : c.columns) {
        if (col >= layout.num_features)
          Fail(ErrorKind::kInvalidArgument, "concept column out of range");
      }
      c.encoder = MakeMlpEncoder(c.columns.size(), layout.hidden, layout.leaky_slope,
                                 encoder_dropout);
      InitMlpEncoder(c.encoder, rng);
      model.bank.concepts.push_back(std::move(c));
    }
    ValidateConceptBank(model.bank);
  }
  model.net = InitTaylorNet(layout.concept_dim(), layout.num_outputs, ranks, rng());
  return model;
}

CatModel ZerosLike(const CatModel& model) {
  CatModel z;
  z.task = model.task;
  z.bank = ZerosLike(model.bank);
  z.net = ZerosLike(model.net);
  return z;
}

std::vector<ParamRef> Parameters(CatModel& model) {
  std::vector<ParamRef> out;
  if (!model.bank.bypass) {
    for (Concept& c : model.bank.concepts) {
      for (std::size_t l = 0; l < c.encoder.weights.size(); ++l) {
        const std::string prefix = "encoder." + c.name + ".layer" + std::to_string(l);
        out.push_back({prefix + ".weight", c.encoder.weights[l].data(), true});
        out.push_back({prefix + ".bias", c.encoder.biases[l], false});
      }
    }
  }
  out.push_back({"taylor.bias", model.net.bias, false});
  for (TuckerTerm& t : model.net.terms) {
    const std::string prefix = "taylor.order" + std::to_string(t.order);
    out.push_back({prefix + ".core", t.core.data(), true});
    out.push_back({prefix + ".out_factor", t.out_factor.data(), true});
    for (std::size_t j = 0; j < t.in_factors.size(); ++j) {
      out.push_back({prefix + ".in_factor" + std::to_string(j + 1), t.in_factors[j].data(),
                     true});
    }
  }
  return out;
}

std::size_t CountParams(const CatModel& model) {
  std::size_t n = 0;
  for (const ParamRef& p : Parameters(const_cast<CatModel&>(model))) n += p.values.size();
  return n;
}

Matrix EncodeConcepts(const CatModel& model, const Matrix& x) {
  return Encode(model.bank, x, EncodeMode::kEval).z;
}

Matrix Predict(const CatModel& model, const Matrix& x) {
  return Forward(model.net, EncodeConcepts(model, x));
}

Matrix ForwardTrain(const CatModel& model, const Matrix& x, double taylor_dropout,
                    std::mt19937_64& rng, ModelTape& tape) {
  if (!(taylor_dropout >= 0.0 && taylor_dropout < 1.0))
    Fail(ErrorKind::kInvalidArgument, "TaylorNet dropout must lie in [0, 1)");
  tape.encoded = Encode(model.bank, x, EncodeMode::kTrain, &rng);
  tape.taylor_input = tape.encoded.z;
  tape.taylor_mask = Matrix();
  if (taylor_dropout > 0.0) {
    tape.taylor_mask = Matrix(x.rows(), tape.taylor_input.cols());
    std::bernoulli_distribution keep(1.0 - taylor_dropout);
    const double scale = 1.0 / (1.0 - taylor_dropout);
    for (double& v : tape.taylor_mask.data()) v = keep(rng) ? scale : 0.0;
    for (std::size_t i = 0; i < tape.taylor_input.size(); ++i)
      tape.taylor_input.data()[i] *= tape.taylor_mask.data()[i];
  }
  return Forward(model.net, tape.taylor_input);
}

CatModel BackwardModel(const CatModel& model, const ModelTape& tape, const Matrix& upstream) {
  TaylorGradients tg = Backward(model.net, tape.taylor_input, upstream);
  Matrix dz = std::move(tg.inputs);
  if (tape.taylor_mask.size() > 0) {
    for (std::size_t i = 0; i < dz.size(); ++i) dz.data()[i] *= tape.taylor_mask.data()[i];
  }
  CatModel grad;
  grad.task = model.task;
  grad.net = std::move(tg.params);
  grad.bank = EncoderBackward(model.bank, tape.encoded.cache, dz);
  return grad;
}

}  // namespace cat
