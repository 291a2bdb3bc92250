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

#include "cat/concept_encoder.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "cat/error.h"

namespace cat {

namespace {

double Leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
double LeakyGrad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

Matrix Gather(const Matrix& x, const std::vector<std::size_t>& columns) {
  Matrix out(x.rows(), columns.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < columns.size(); ++c) out(i, c) = x(i, columns[c]);
  return out;
}

// out = in W^T + b, rows in parallel.
Matrix LayerForward(const Matrix& in, const Matrix& w, const std::vector<double>& b) {
  Matrix out(in.rows(), w.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto a = in.row(i);
    auto o = out.row(i);
    for (std::size_t u = 0; u < w.rows(); ++u) {
      const auto wu = w.row(u);
      double acc = b[u];
      for (std::size_t j = 0; j < a.size(); ++j) acc += wu[j] * a[j];
      o[u] = acc;
    }
  }
  return out;
}

void CheckFinite(const Matrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double v : x.row(i))
      if (!std::isfinite(v))
        Fail(ErrorKind::kNumerical, "non-finite feature in row " + std::to_string(i));
}

}  // namespace

MlpEncoder MakeMlpEncoder(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                          double negative_slope, double dropout) {
  if (input_dim == 0) Fail(ErrorKind::kInvalidArgument, "encoder input width must be >= 1");
  if (!(negative_slope > 0.0)) Fail(ErrorKind::kInvalidArgument, "LeakyReLU slope must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0))
    Fail(ErrorKind::kInvalidArgument, "dropout rate must lie in [0, 1)");
  MlpEncoder enc;
  enc.negative_slope = negative_slope;
  enc.dropout = dropout;
  std::size_t in = input_dim;
  for (std::size_t width : hidden) {
    if (width == 0) Fail(ErrorKind::kInvalidArgument, "hidden width must be >= 1");
    enc.weights.emplace_back(width, in);
    enc.biases.emplace_back(width, 0.0);
    in = width;
  }
  enc.weights.emplace_back(1, in);
  enc.biases.emplace_back(1, 0.0);
  return enc;
}

void InitMlpEncoder(MlpEncoder& encoder, std::mt19937_64& rng) {
  for (std::size_t l = 0; l < encoder.weights.size(); ++l) {
    Matrix& w = encoder.weights[l];
    const double a = std::sqrt(1.0 / static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-a, a);
    for (double& v : w.data()) v = dist(rng);
    std::fill(encoder.biases[l].begin(), encoder.biases[l].end(), 0.0);
  }
}

void ValidateConceptBank(const ConceptBank& bank) {
  if (bank.bypass) return;
  std::set<std::string> names;
  std::set<std::size_t> used;
  for (const Concept& c : bank.concepts) {
    if (!names.insert(c.name).second)
      Fail(ErrorKind::kSpecInvalid, "duplicate concept name '" + c.name + "'");
    if (c.columns.empty()) Fail(ErrorKind::kSpecInvalid, "concept '" + c.name + "' has no columns");
    for (std::size_t col : c.columns) {
      if (!used.insert(col).second)
        Fail(ErrorKind::kSpecInvalid,
             "column " + std::to_string(col) + " is assigned to more than one concept");
    }
    if (c.encoder.weights.empty() || c.encoder.input_dim() != c.columns.size())
      Fail(ErrorKind::kShape, "encoder of concept '" + c.name + "' has the wrong input width");
  }
}

EncodeResult Encode(const ConceptBank& bank, const Matrix& x, EncodeMode mode,
                    std::mt19937_64* rng) {
  CheckFinite(x);
  EncodeResult result;
  result.cache.rows = x.rows();
  if (bank.bypass) {
    if (x.cols() != bank.bypass_width)
      Fail(ErrorKind::kShape, "bypass expects " + std::to_string(bank.bypass_width) +
                                  " feature columns, got " + std::to_string(x.cols()));
    result.z = x;
    return result;
  }
  if (mode == EncodeMode::kTrain && rng == nullptr)
    Fail(ErrorKind::kInvalidArgument, "train-mode encoding needs a random generator");

  result.z = Matrix(x.rows(), bank.concepts.size());
  result.cache.concepts.resize(bank.concepts.size());
  for (std::size_t m = 0; m < bank.concepts.size(); ++m) {
    const Concept& c = bank.concepts[m];
    for (std::size_t col : c.columns) {
      if (col >= x.cols())
        Fail(ErrorKind::kShape, "concept '" + c.name + "' references column " +
                                    std::to_string(col) + " beyond width " +
                                    std::to_string(x.cols()));
    }
    const MlpEncoder& enc = c.encoder;
    EncoderCache::Layers& layers = result.cache.concepts[m];
    Matrix act = Gather(x, c.columns);
    const std::size_t hidden = enc.num_layers() - 1;
    const bool drop = mode == EncodeMode::kTrain && enc.dropout > 0.0;
    for (std::size_t l = 0; l < hidden; ++l) {
      Matrix pre = LayerForward(act, enc.weights[l], enc.biases[l]);
      layers.inputs.push_back(std::move(act));
      act = pre;
      for (double& v : act.data()) v = Leaky(v, enc.negative_slope);
      if (drop) {
        Matrix mask(act.rows(), act.cols());
        std::bernoulli_distribution keep(1.0 - enc.dropout);
        const double scale = 1.0 / (1.0 - enc.dropout);
        for (double& v : mask.data()) v = keep(*rng) ? scale : 0.0;
        for (std::size_t i = 0; i < act.size(); ++i) act.data()[i] *= mask.data()[i];
        layers.masks.push_back(std::move(mask));
      }
      layers.pre.push_back(std::move(pre));
    }
    Matrix out = LayerForward(act, enc.weights.back(), enc.biases.back());
    layers.inputs.push_back(std::move(act));
    for (std::size_t i = 0; i < x.rows(); ++i) result.z(i, m) = out(i, 0);
  }
  return result;
}

ConceptBank EncoderBackward(const ConceptBank& bank, const EncoderCache& cache,
                            const Matrix& upstream) {
  ConceptBank grad = ZerosLike(bank);
  if (bank.bypass) return grad;
  if (cache.concepts.size() != bank.concepts.size() || upstream.rows() != cache.rows ||
      upstream.cols() != bank.concepts.size()) {
    Fail(ErrorKind::kShape, "encoder backward: cache or upstream does not match the bank");
  }
  const std::size_t rows = cache.rows;
  for (std::size_t m = 0; m < bank.concepts.size(); ++m) {
    const MlpEncoder& enc = bank.concepts[m].encoder;
    MlpEncoder& genc = grad.concepts[m].encoder;
    const EncoderCache::Layers& layers = cache.concepts[m];
    const std::size_t hidden = enc.num_layers() - 1;
    if (layers.inputs.size() != enc.num_layers() || layers.pre.size() != hidden ||
        (!layers.masks.empty() && layers.masks.size() != hidden)) {
      Fail(ErrorKind::kShape, "encoder backward: cache does not match encoder layers");
    }
    // Gradient with respect to the current layer's output (pre-activation
    // for the linear output layer).
    Matrix delta(rows, 1);
    for (std::size_t i = 0; i < rows; ++i) delta(i, 0) = upstream(i, m);

    for (std::size_t l = enc.num_layers(); l-- > 0;) {
      const Matrix& w = enc.weights[l];
      const Matrix& in = layers.inputs[l];
      Matrix& gw = genc.weights[l];
      std::vector<double>& gb = genc.biases[l];
      const std::ptrdiff_t outs = static_cast<std::ptrdiff_t>(w.rows());
      // Weight gradients: parallel over output units, serial over rows, so
      // the summation order is fixed.
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t u = 0; u < outs; ++u) {
        auto gwu = gw.row(u);
        double bsum = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          const double g = delta(i, u);
          if (g == 0.0) continue;
          bsum += g;
          const auto a = in.row(i);
          for (std::size_t j = 0; j < a.size(); ++j) gwu[j] += g * a[j];
        }
        gb[u] = bsum;
      }
      if (l == 0) break;
      // Propagate to the previous hidden layer's pre-activation.
      Matrix prev(rows, w.cols());
      const Matrix& pre = layers.pre[l - 1];
      const Matrix* mask = layers.masks.empty() ? nullptr : &layers.masks[l - 1];
      const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto p = prev.row(i);
        for (std::size_t u = 0; u < w.rows(); ++u) {
          const double g = delta(i, u);
          if (g == 0.0) continue;
          const auto wu = w.row(u);
          for (std::size_t j = 0; j < p.size(); ++j) p[j] += g * wu[j];
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
          double v = p[j];
          if (mask) v *= (*mask)(i, j);
          p[j] = v * LeakyGrad(pre(i, j), enc.negative_slope);
        }
      }
      delta = std::move(prev);
    }
  }
  return grad;
}

Matrix EncodeReference(const ConceptBank& bank, const Matrix& x) {
  if (bank.bypass) return x;
  Matrix z(x.rows(), bank.concepts.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t m = 0; m < bank.concepts.size(); ++m) {
      const Concept& c = bank.concepts[m];
      std::vector<double> act;
      for (std::size_t col : c.columns) act.push_back(x(i, col));
      for (std::size_t l = 0; l < c.encoder.num_layers(); ++l) {
        std::vector<double> next = MatVec(c.encoder.weights[l], act);
        for (std::size_t u = 0; u < next.size(); ++u) {
          next[u] += c.encoder.biases[l][u];
          if (l + 1 < c.encoder.num_layers()) next[u] = Leaky(next[u], c.encoder.negative_slope);
        }
        act = std::move(next);
      }
      z(i, m) = act[0];
    }
  }
  return z;
}

ConceptBank ZerosLike(const ConceptBank& bank) {
  ConceptBank z = bank;
  for (Concept& c : z.concepts) {
    for (Matrix& w : c.encoder.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    for (auto& b : c.encoder.biases) std::fill(b.begin(), b.end(), 0.0);
  }
  return z;
}

std::size_t CountParams(const ConceptBank& bank) {
  if (bank.bypass) return 0;
  std::size_t n = 0;
  for (const Concept& c : bank.concepts) {
    for (const Matrix& w : c.encoder.weights) n += w.size();
    for (const auto& b : c.encoder.biases) n += b.size();
  }
  return n;
}

}  // namespace cat
