// Copyright 2026 The cgain Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "cgain/error.hpp"

namespace cgain {

/// Dense row-major matrix of doubles. Rows are samples, columns are features.
///
/// All kernels below run single-threaded with a fixed reduction order so the
/// same inputs always produce bit-identical outputs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorKind::kShape,
            "matrix data size " + std::to_string(data_.size()) + " != " + std::to_string(rows_) +
                "x" + std::to_string(cols_));
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      require(row.size() == c, ErrorKind::kShape, "ragged row in from_rows");
      std::copy(row.begin(), row.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
      ++i;
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  require(a.same_shape(b), ErrorKind::kShape,
          std::string(what) + ": " + shape_string(a) + " vs " + shape_string(b));
}

/// out = a * w^T + bias, where w is (out x in) and bias is (1 x out).
inline Matrix affine(const Matrix& a, const Matrix& w, const Matrix& bias) {
  require(a.cols() == w.cols(), ErrorKind::kShape,
          "affine: input " + shape_string(a) + " vs weight " + shape_string(w));
  require(bias.rows() == 1 && bias.cols() == w.rows(), ErrorKind::kShape, "affine: bias shape");
  Matrix out(a.rows(), w.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto x = a.row(i);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const auto wr = w.row(o);
      double acc = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * wr[k];
      out(i, o) = acc + bias[o];
    }
  }
  return out;
}

/// a^T * b, with a (n x p) and b (n x q) giving (p x q). Sum runs over rows in order.
inline Matrix transpose_times(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorKind::kShape, "transpose_times row mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    const auto br = b.row(i);
    for (std::size_t p = 0; p < ar.size(); ++p) {
      const double s = ar[p];
      if (s == 0.0) continue;
      auto orow = out.row(p);
      for (std::size_t q = 0; q < br.size(); ++q) orow[q] += s * br[q];
    }
  }
  return out;
}

/// a * w, with a (n x out) and w (out x in) giving (n x in).
inline Matrix times(const Matrix& a, const Matrix& w) {
  require(a.cols() == w.rows(), ErrorKind::kShape, "times shape mismatch");
  Matrix out(a.rows(), w.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    const auto ar = a.row(i);
    for (std::size_t k = 0; k < ar.size(); ++k) {
      const double s = ar[k];
      if (s == 0.0) continue;
      const auto wr = w.row(k);
      for (std::size_t j = 0; j < wr.size(); ++j) orow[j] += s * wr[j];
    }
  }
  return out;
}

/// Column sums as a (1 x cols) matrix.
inline Matrix column_sums(const Matrix& a) {
  Matrix out(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j];
  }
  return out;
}

/// Horizontal concatenation of blocks with equal row counts.
inline Matrix hconcat(std::initializer_list<const Matrix*> blocks) {
  std::size_t rows = (*blocks.begin())->rows();
  std::size_t cols = 0;
  for (const Matrix* b : blocks) {
    require(b->rows() == rows, ErrorKind::kShape, "hconcat row mismatch");
    cols += b->cols();
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t offset = 0;
    for (const Matrix* b : blocks) {
      const auto src = b->row(i);
      std::copy(src.begin(), src.end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
      offset += b->cols();
    }
  }
  return out;
}

/// Columns [begin, begin + count) of a.
inline Matrix column_block(const Matrix& a, std::size_t begin, std::size_t count) {
  require(begin + count <= a.cols(), ErrorKind::kShape, "column_block out of range");
  Matrix out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto src = a.row(i).subspan(begin, count);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

inline Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < a.rows(), ErrorKind::kShape, "select_rows index out of range");
    const auto src = a.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

/// Entrywise `mask * observed + (1 - mask) * fill`. For binary masks the
/// observed cells are copied bit-for-bit rather than computed.
inline Matrix mix_by_mask(const Matrix& mask, const Matrix& observed, const Matrix& fill) {
  require_same_shape(mask, observed, "mix_by_mask");
  require_same_shape(mask, fill, "mix_by_mask");
  Matrix out(mask.rows(), mask.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double m = mask[i];
    if (m == 1.0) {
      out[i] = observed[i];
    } else if (m == 0.0) {
      out[i] = fill[i];
    } else {
      out[i] = m * observed[i] + (1.0 - m) * fill[i];
    }
  }
  return out;
}

inline double max_abs_difference(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_difference");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace cgain
