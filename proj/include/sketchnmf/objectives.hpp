#pragma once

#include <map>
#include <optional>
#include <string>

#include "sketchnmf/matrix.hpp"
#include "sketchnmf/sketching.hpp"

namespace sketchnmf {

/// Nonnegative factors of X ~ U V^T; U is m x r, V is n x r.
struct FactorPair {
  DenseMatrix u;
  DenseMatrix v;

  std::size_t rank() const noexcept { return u.cols(); }
};

/// Regularization and shift weights. One-sided problems read lambda and
/// sigma, two-sided ones the indexed fields. A missing sigma means "use the
/// smallest certified value".
struct RegularizationParams {
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<double> sigma;
  std::optional<double> sigma1;
  std::optional<double> sigma2;
};

/// Objective value together with its named, unscaled parts. total is the sum
/// of terms.
struct ObjectiveValue {
  double total = 0.0;
  std::map<std::string, double> terms;
};

/// ||AX - AUV^T||^2 + lambda ||(I - A^T A) U V^T||^2 + sigma ||1^T(X - UV^T)||^2
/// for A with orthonormal rows. Terms: residual, regularizer, shift.
ObjectiveValue obj_one_sided_orthogonal_terms(const CompressedOneSided& c, const FactorPair& f,
                                              double lambda, double sigma);
double obj_one_sided_orthogonal(const CompressedOneSided& c, const FactorPair& f, double lambda,
                                double sigma);

/// ||AX - AUV^T||^2 + lambda ||UV^T||^2 + sigma ||1^T(X - UV^T)||^2.
ObjectiveValue obj_one_sided_ridge_terms(const CompressedOneSided& c, const FactorPair& f,
                                         double lambda, double sigma);
double obj_one_sided_ridge(const CompressedOneSided& c, const FactorPair& f, double lambda,
                           double sigma);

/// ||A1 X - A1 UV^T||^2 + ||X A2 - UV^T A2||^2
///   + lambda1 ||(I - Q1 Q1^T) UV^T||^2 + lambda2 ||UV^T (I - Q2 Q2^T)||^2
///   + sigma1 ||1^T(X - UV^T)||^2 + sigma2 ||(X - UV^T) 1||^2.
/// Missing sigmas count as zero here.
ObjectiveValue obj_two_sided_terms(const CompressedTwoSided& c, const FactorPair& f,
                                   const RegularizationParams& params);
double obj_two_sided(const CompressedTwoSided& c, const FactorPair& f,
                     const RegularizationParams& params);

/// ||X - UV^T||_F^2.
double obj_full(const DenseMatrix& x, const FactorPair& f);

}  // namespace sketchnmf
