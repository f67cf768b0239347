// SPDX-License-Identifier: Apache-2.0
#include "avoco/matrix.hpp"

#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector data) : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

bool Matrix::all_finite() const noexcept { return avoco::all_finite(data_); }

bool all_finite(std::span<const double> v) noexcept {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Vector matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) {
    throw ShapeError("matvec: vector length " + std::to_string(x.size()) + " vs " + std::to_string(m.cols()) +
                     " columns");
  }
  Vector y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) {
    throw ShapeError("matvec_transposed: vector length " + std::to_string(x.size()) + " vs " +
                     std::to_string(m.rows()) + " rows");
  }
  Vector y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) y[c] += row[c] * x[r];
  }
  return y;
}

void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b) {
  if (a.size() != m.rows() || b.size() != m.cols()) throw ShapeError("add_outer: operand lengths do not match matrix");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += a[r] * b[c];
  }
}

}  // namespace avoco
