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

#include "cat/tensor.h"

#include <functional>
#include <numeric>
#include <string>
#include <utility>

#include "cat/error.h"

namespace cat {

namespace {

std::size_t Product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeString(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

void CheckMode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.ndims()) {
    Fail(ErrorKind::kShape, "mode " + std::to_string(mode) +
                                " out of range for tensor of shape " +
                                ShapeString(t.shape()));
  }
}

// Sizes of the modes before and after `mode` when the tensor is viewed as a
// (left, dim, right) block.
std::pair<std::size_t, std::size_t> OuterInner(const std::vector<std::size_t>& shape,
                                               std::size_t mode) {
  std::size_t left = 1, right = 1;
  for (std::size_t m = 0; m < mode; ++m) left *= shape[m];
  for (std::size_t m = mode + 1; m < shape.size(); ++m) right *= shape[m];
  return {left, right};
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    Fail(ErrorKind::kShape, "matrix data length " + std::to_string(data_.size()) +
                                " != " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    Fail(ErrorKind::kShape, "matmul inner dimensions " + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

std::vector<double> MatVec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    Fail(ErrorKind::kShape, "matvec: matrix has " + std::to_string(a.cols()) +
                                " columns, vector has " + std::to_string(x.size()));
  }
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> MatTVec(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    Fail(ErrorKind::kShape, "matTvec: matrix has " + std::to_string(a.rows()) +
                                " rows, vector has " + std::to_string(x.size()));
  }
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
  }
  return y;
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)) {
  for (std::size_t s : shape_) {
    if (s == 0) Fail(ErrorKind::kShape, "tensor mode sizes must be >= 1");
  }
  data_.assign(Product(shape_), fill);
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t s : shape_) {
    if (s == 0) Fail(ErrorKind::kShape, "tensor mode sizes must be >= 1");
  }
  if (Product(shape_) != data_.size()) {
    Fail(ErrorKind::kShape, "tensor shape " + ShapeString(shape_) +
                                " does not match data length " +
                                std::to_string(data_.size()));
  }
}

DenseTensor DenseTensor::FromMatrix(const Matrix& m) {
  return DenseTensor({m.rows(), m.cols()}, m.data());
}

std::vector<std::size_t> DenseTensor::Strides() const {
  std::vector<std::size_t> strides(shape_.size(), 1);
  for (std::size_t m = shape_.size(); m-- > 1;) strides[m - 1] = strides[m] * shape_[m];
  return strides;
}

std::size_t DenseTensor::FlatIndex(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) Fail(ErrorKind::kShape, "index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t m = 0; m < shape_.size(); ++m) {
    if (index[m] >= shape_[m]) Fail(ErrorKind::kShape, "index out of range");
    flat = flat * shape_[m] + index[m];
  }
  return flat;
}

double& DenseTensor::at(std::span<const std::size_t> index) {
  return data_[FlatIndex(index)];
}

double DenseTensor::at(std::span<const std::size_t> index) const {
  return data_[FlatIndex(index)];
}

DenseTensor ModeNMatrixProduct(const DenseTensor& t, const Matrix& m,
                               std::size_t mode) {
  CheckMode(t, mode);
  if (m.cols() != t.dim(mode)) {
    Fail(ErrorKind::kShape, "mode-" + std::to_string(mode) + " product: matrix has " +
                                std::to_string(m.cols()) + " columns but mode size is " +
                                std::to_string(t.dim(mode)));
  }
  const auto [left, right] = OuterInner(t.shape(), mode);
  const std::size_t in_dim = t.dim(mode);
  const std::size_t out_dim = m.rows();
  std::vector<std::size_t> shape = t.shape();
  shape[mode] = out_dim;
  DenseTensor out(shape);
  const auto& src = t.data();
  auto& dst = out.data();
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < out_dim; ++r) {
      double* o = dst.data() + (l * out_dim + r) * right;
      for (std::size_t j = 0; j < in_dim; ++j) {
        const double w = m(r, j);
        const double* s = src.data() + (l * in_dim + j) * right;
        for (std::size_t q = 0; q < right; ++q) o[q] += w * s[q];
      }
    }
  }
  return out;
}

DenseTensor ModeNVectorProduct(const DenseTensor& t, std::span<const double> v,
                               std::size_t mode) {
  CheckMode(t, mode);
  if (v.size() != t.dim(mode)) {
    Fail(ErrorKind::kShape, "mode-" + std::to_string(mode) + " vector product: vector length " +
                                std::to_string(v.size()) + " != mode size " +
                                std::to_string(t.dim(mode)));
  }
  const auto [left, right] = OuterInner(t.shape(), mode);
  const std::size_t in_dim = t.dim(mode);
  std::vector<std::size_t> shape;
  for (std::size_t m = 0; m < t.ndims(); ++m)
    if (m != mode) shape.push_back(t.dim(m));
  std::vector<double> data(left * right, 0.0);
  const auto& src = t.data();
  for (std::size_t l = 0; l < left; ++l) {
    double* o = data.data() + l * right;
    for (std::size_t j = 0; j < in_dim; ++j) {
      const double w = v[j];
      const double* s = src.data() + (l * in_dim + j) * right;
      for (std::size_t q = 0; q < right; ++q) o[q] += w * s[q];
    }
  }
  return DenseTensor(std::move(shape), std::move(data));
}

Matrix Matricize(const DenseTensor& t, std::size_t mode) {
  CheckMode(t, mode);
  const auto& shape = t.shape();
  const std::size_t rows = shape[mode];
  const std::size_t cols = t.size() / rows;
  // Column strides: lower remaining modes vary fastest.
  std::vector<std::size_t> col_stride(shape.size(), 0);
  std::size_t acc = 1;
  for (std::size_t m = 0; m < shape.size(); ++m) {
    if (m == mode) continue;
    col_stride[m] = acc;
    acc *= shape[m];
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> index(shape.size(), 0);
  for (double value : t.data()) {
    std::size_t col = 0;
    for (std::size_t m = 0; m < shape.size(); ++m) col += index[m] * col_stride[m];
    out(index[mode], col) = value;
    for (std::size_t m = shape.size(); m-- > 0;) {
      if (++index[m] < shape[m]) break;
      index[m] = 0;
    }
  }
  return out;
}

DenseTensor Fold(const Matrix& m, std::size_t mode,
                 const std::vector<std::size_t>& shape) {
  DenseTensor out(shape);
  CheckMode(out, mode);
  if (m.rows() != shape[mode] || m.size() != out.size()) {
    Fail(ErrorKind::kShape, "fold: matrix " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " incompatible with shape " +
                                ShapeString(shape));
  }
  std::vector<std::size_t> col_stride(shape.size(), 0);
  std::size_t acc = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k == mode) continue;
    col_stride[k] = acc;
    acc *= shape[k];
  }
  std::vector<std::size_t> index(shape.size(), 0);
  for (double& value : out.data()) {
    std::size_t col = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) col += index[k] * col_stride[k];
    value = m(index[mode], col);
    for (std::size_t k = shape.size(); k-- > 0;) {
      if (++index[k] < shape[k]) break;
      index[k] = 0;
    }
  }
  return out;
}

std::vector<double> KroneckerVec(std::span<const double> u, std::span<const double> v) {
  std::vector<double> out(u.size() * v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i * v.size() + j] = u[i] * v[j];
  return out;
}

Matrix KroneckerMat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return out;
}

DenseTensor TuckerReconstruct(const DenseTensor& core,
                              const std::vector<Matrix>& factors) {
  if (factors.size() != core.ndims()) {
    Fail(ErrorKind::kShape, "tucker: " + std::to_string(factors.size()) +
                                " factors for a " + std::to_string(core.ndims()) +
                                "-way core");
  }
  DenseTensor out = core;
  for (std::size_t m = 0; m < factors.size(); ++m) out = ModeNMatrixProduct(out, factors[m], m);
  return out;
}

}  // namespace cat
