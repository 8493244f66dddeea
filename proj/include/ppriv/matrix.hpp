// Copyright 2026 The ppriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ppriv {

// Small dense row-major matrix. Sized at construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// Row vector times matrix: (v * M), the output distribution induced by a
// transition matrix applied to an input distribution.
inline std::vector<double> left_apply(std::span<const double> v, const Matrix& m) {
  if (v.size() != m.rows()) throw std::invalid_argument("left_apply: shape mismatch");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * m(i, j);
  }
  return out;
}

inline bool is_row_stochastic(const Matrix& m, double tol) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double e = m(i, j);
      if (!std::isfinite(e) || e < -tol || e > 1.0 + tol) return false;
      sum += e;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

// Clamps entries to [0, 1] and rescales each row to sum exactly to 1.
// Returns the largest absolute change applied to any entry.
inline double clamp_and_renormalize_rows(Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double e = m(i, j);
      double c = e < 0.0 ? 0.0 : (e > 1.0 ? 1.0 : e);
      worst = std::max(worst, std::abs(c - e));
      m(i, j) = c;
      sum += c;
    }
    if (sum <= 0.0) throw std::invalid_argument("renormalize: zero row");
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double e = m(i, j);
      double c = e / sum;
      worst = std::max(worst, std::abs(c - e));
      m(i, j) = c;
    }
  }
  return worst;
}

}  // namespace ppriv
