#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sketchnmf/alloc_audit.hpp"

namespace sketchnmf {

using Storage = std::vector<double, AuditedAllocator<double>>;

/// Row-major dense real matrix. Dimensions are always positive and, on every
/// construction path that takes caller data, all entries are finite.
class DenseMatrix {
 public:
  /// Zero-filled rows x cols matrix.
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;
  bool all_nonnegative() const noexcept;

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) noexcept {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  Storage data_;
};

/// Dense real vector; positive length, finite entries.
class Vector {
 public:
  explicit Vector(std::size_t len);
  explicit Vector(std::span<const double> values);
  Vector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return data_.size(); }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Vector& a, const Vector& b) noexcept { return a.data_ == b.data_; }

 private:
  Storage data_;
};

}  // namespace sketchnmf
