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

// Concept encoders: one MLP per feature group, each producing a scalar
// concept value. Hidden layers use LeakyReLU followed by inverted dropout
// in training mode; the output layer is linear.

#ifndef CAT_CONCEPT_ENCODER_H_
#define CAT_CONCEPT_ENCODER_H_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "cat/tensor.h"

namespace cat {

inline constexpr double kDefaultLeakySlope = 0.01;

inline const std::vector<std::size_t>& DefaultHiddenWidths() {
  static const std::vector<std::size_t> widths{64, 64, 32};
  return widths;
}

struct MlpEncoder {
  // weights[l] is (out x in) for layer l; the last layer has one output.
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  double negative_slope = kDefaultLeakySlope;
  double dropout = 0.0;

  std::size_t input_dim() const { return weights.front().cols(); }
  std::size_t num_layers() const { return weights.size(); }
};

// Zero weights. Throws kInvalidArgument for a bad slope or dropout rate.
MlpEncoder MakeMlpEncoder(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                          double negative_slope = kDefaultLeakySlope,
                          double dropout = 0.0);

// Weights uniform in [-a, a], a = sqrt(1 / fan_in); biases zero.
void InitMlpEncoder(MlpEncoder& encoder, std::mt19937_64& rng);

struct Concept {
  std::string name;
  std::vector<std::size_t> columns;  // indices into the feature matrix
  MlpEncoder encoder;
};

struct ConceptBank {
  std::vector<Concept> concepts;
  // Skip the encoders: the feature matrix itself is the concept vector.
  bool bypass = false;
  std::size_t bypass_width = 0;

  std::size_t output_dim() const { return bypass ? bypass_width : concepts.size(); }
};

// Throws kSpecInvalid when names repeat or column sets overlap.
void ValidateConceptBank(const ConceptBank& bank);

enum class EncodeMode { kTrain, kEval };

// Activations kept from a forward pass, per concept.
struct EncoderCache {
  struct Layers {
    std::vector<Matrix> inputs;  // input to layer l (post-dropout)
    std::vector<Matrix> pre;     // pre-activation of hidden layer l
    std::vector<Matrix> masks;   // dropout scale (0 or 1/(1-p)); empty in eval
  };
  std::vector<Layers> concepts;
  std::size_t rows = 0;
};

struct EncodeResult {
  Matrix z;
  EncoderCache cache;
};

// Batched encoding; rows are samples. Train mode needs `rng` for dropout
// masks, which are drawn serially so runs are reproducible. Eval mode is
// deterministic. Layer kernels are OpenMP-parallel over rows.
EncodeResult Encode(const ConceptBank& bank, const Matrix& x, EncodeMode mode,
                    std::mt19937_64* rng = nullptr);

// Gradients of sum <upstream, z> with respect to every encoder weight and
// bias, returned in the shape of `bank`.
ConceptBank EncoderBackward(const ConceptBank& bank, const EncoderCache& cache,
                            const Matrix& upstream);

// Serial per-sample eval-mode encoding, kept as a reference for Encode.
Matrix EncodeReference(const ConceptBank& bank, const Matrix& x);

ConceptBank ZerosLike(const ConceptBank& bank);

std::size_t CountParams(const ConceptBank& bank);

}  // namespace cat

#endif  // CAT_CONCEPT_ENCODER_H_
