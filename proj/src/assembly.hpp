#pragma once

#include <span>
#include <vector>

#include "sketchnmf/problem.hpp"

namespace sketchnmf::detail {

/// Aggregates for one block update: F is the factor on `side`, O the other one.
/// Both gradient halves come out row by row, so nothing of size m x n or
/// dim x dim is ever formed:
///   den(i) = F(i) M + sum_own S(i,:) Z - sum_proj lambda Q(i,:) H + c_den
///   num(i) = sum_own S(i,:) W + sum_other T(i,:) SO + s_i a + c_num
class Assembly {
 public:
  Assembly(const SketchedMUProblem& p, Side side, const DenseMatrix& f, const DenseMatrix& o);

  std::size_t rows() const noexcept { return f_->rows(); }
  std::size_t rank() const noexcept { return r_; }

  void den_row(std::size_t i, std::span<double> out) const;
  /// Sum of every den entry, from column sums instead of a full pass.
  double den_total() const;
  void num_row(std::size_t i, std::span<double> out) const;

 private:
  struct Projected {
    const OperandView* view;
    std::vector<double> agg;  // k x r
    double scale;
  };
  struct Sums {
    const Vector* sums;
    std::vector<double> a;  // r
  };

  const DenseMatrix* f_;
  std::size_t r_;
  std::vector<double> m_;          // r x r
  std::vector<double> c_den_;      // r
  std::vector<double> c_num_;      // r
  std::vector<Projected> den_parts_;
  std::vector<Projected> num_parts_;
  std::vector<Sums> sum_parts_;
};

}  // namespace sketchnmf::detail
