#include "sketchnmf/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "sketchnmf/errors.hpp"

namespace sketchnmf {

namespace {

void require_positive(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw InvalidDim("matrix dimensions must be positive, got " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidDim("non-finite value in matrix data");
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  require_positive(rows, cols);
  data_.assign(rows * cols, 0.0);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> row_major)
    : rows_(rows), cols_(cols) {
  require_positive(rows, cols);
  if (row_major.size() != rows * cols) {
    throw DimMismatch("data length " + std::to_string(row_major.size()) + " != " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(row_major);
  data_.assign(row_major.begin(), row_major.end());
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  require_positive(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimMismatch("ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool DenseMatrix::all_nonnegative() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0; });
}

Vector::Vector(std::size_t len) {
  if (len == 0) throw InvalidDim("vector length must be positive");
  data_.assign(len, 0.0);
}

Vector::Vector(std::span<const double> values) {
  if (values.empty()) throw InvalidDim("vector length must be positive");
  require_finite(values);
  data_.assign(values.begin(), values.end());
}

Vector::Vector(std::initializer_list<double> values)
    : Vector(std::span<const double>(values.begin(), values.size())) {}

}  // namespace sketchnmf
