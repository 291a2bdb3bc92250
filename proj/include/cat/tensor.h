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

// Small dense tensor kernels.
//
// Index convention (shared by every module):
//  * DenseTensor stores data row-major, the last mode varying fastest.
//  * Modes are 0-based in this API (mode 0 is the usual 1-based "mode-1").
//  * Matricize(T, n) puts mode n on the rows; the columns enumerate the
//    remaining modes with the lower-numbered ones varying fastest.
//  * KroneckerVec(u, v) lets the right operand's index vary fastest.
// With this pair, mode-0 unfolding of a Tucker core lines up with a
// Kronecker product written in descending mode order.

#ifndef CAT_TENSOR_H_
#define CAT_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace cat {

// Row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Matrix Transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix MatMul(const Matrix& a, const Matrix& b);
// y = A x
std::vector<double> MatVec(const Matrix& a, std::span<const double> x);
// y = A^T x
std::vector<double> MatTVec(const Matrix& a, std::span<const double> x);

class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape, double fill = 0.0);
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

  static DenseTensor FromMatrix(const Matrix& m);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndims() const { return shape_.size(); }
  std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
  std::size_t size() const { return data_.size(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;

  // Row-major strides, last mode stride 1.
  std::vector<std::size_t> Strides() const;

  bool operator==(const DenseTensor&) const = default;

 private:
  std::size_t FlatIndex(std::span<const std::size_t> index) const;

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// T x_n M: mode n of size M.cols() is replaced by M.rows().
DenseTensor ModeNMatrixProduct(const DenseTensor& t, const Matrix& m,
                               std::size_t mode);

// Contracts mode n with v and drops that mode. Contracting the only mode of a
// 1-way tensor yields a 0-way tensor (shape {}, one element).
DenseTensor ModeNVectorProduct(const DenseTensor& t, std::span<const double> v,
                               std::size_t mode);

Matrix Matricize(const DenseTensor& t, std::size_t mode);

// Inverse of Matricize for a tensor of the given shape.
DenseTensor Fold(const Matrix& m, std::size_t mode,
                 const std::vector<std::size_t>& shape);

std::vector<double> KroneckerVec(std::span<const double> u,
                                 std::span<const double> v);

Matrix KroneckerMat(const Matrix& a, const Matrix& b);

// core x_0 factors[0] x_1 factors[1] ... ; one factor per mode.
DenseTensor TuckerReconstruct(const DenseTensor& core,
                              const std::vector<Matrix>& factors);

}  // namespace cat

#endif  // CAT_TENSOR_H_
