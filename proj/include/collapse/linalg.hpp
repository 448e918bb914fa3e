// Copyright 2026 The collapse-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace collapse::linalg {

/// Thrown on non-conformable operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major real matrix. Constructors reject non-finite entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Spectral decomposition A = V diag(eigenvalues) V^T, eigenvalues descending.
/// Column i of `eigenvectors` pairs with eigenvalues[i].
struct SymEig {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

/// Product a * b. Each output entry accumulates over the inner index in
/// ascending order, so results do not depend on the thread count.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Serial triple-loop kernels with the same accumulation order as the
/// parallel ones. Kept as the reference for tests and benchmarks.
namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
}  // namespace serial

double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

/// a / ||a||_F. Returns an empty matrix when ||a||_F == 0.
Matrix unit_normalized(const Matrix& a);

bool is_symmetric(const Matrix& a, double tol);

/// Cyclic Jacobi eigensolver for symmetric matrices.
/// Throws std::invalid_argument for non-square or non-symmetric input and
/// std::runtime_error if the sweep budget runs out.
SymEig sym_eig(const Matrix& a);

/// Moore-Penrose inverse of a symmetric PSD matrix. Eigenvalues at or below
/// rel_tol * lambda_max are treated as zero. Throws std::domain_error on an
/// eigenvalue more negative than that cutoff.
Matrix pseudo_inverse(const Matrix& a, double rel_tol = 1e-10);

/// Principal square root of a symmetric PSD matrix.
Matrix psd_sqrt(const Matrix& a, double rel_tol = 1e-10);

}  // namespace collapse::linalg
