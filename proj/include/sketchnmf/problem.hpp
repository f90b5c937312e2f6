#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sketchnmf/matrix.hpp"
#include "sketchnmf/objectives.hpp"
#include "sketchnmf/sketching.hpp"

namespace sketchnmf {

/// Read-only view of a matrix as (index, component) pairs, without copying.
/// With dim_major the stored matrix is dim x k, otherwise k x dim.
struct OperandView {
  std::shared_ptr<const DenseMatrix> mat;
  bool dim_major = true;

  std::size_t dim() const noexcept { return dim_major ? mat->rows() : mat->cols(); }
  std::size_t k() const noexcept { return dim_major ? mat->cols() : mat->rows(); }
  double operator()(std::size_t i, std::size_t p) const noexcept {
    return dim_major ? (*mat)(i, p) : (*mat)(p, i);
  }
};

/// The side a term compresses. A left term lives on the row dimension of X
/// (and acts on U), a right term on the column dimension (and acts on V). The
/// other dimension is the term's free dimension.

/// 1/2 ||T - S^T F O^T||^2: sketch is own x k, target is free x k.
struct ExplicitSketch {
  OperandView sketch;
  OperandView target;
};

/// sigma/2 ||s - O F^T 1||^2 with s indexed by the free dimension.
struct RankOneShift {
  double sigma = 0.0;
  std::shared_ptr<const Vector> sums;
};

/// lambda/2 ||(I - Q Q^T) F O^T||^2 with Q own x k orthonormal.
struct ProjectorComplement {
  double lambda = 0.0;
  OperandView basis;
};

/// lambda/2 ||F O^T||^2.
struct ScaledIdentity {
  double lambda = 0.0;
};

struct GramTerm {
  Side side = Side::left;
  std::string name;
  std::variant<ExplicitSketch, RankOneShift, ProjectorComplement, ScaledIdentity> form;
};

struct Validity {
  bool sum_gram_nonneg_certified = false;
  bool sum_target_nonneg_certified = false;

  bool certified() const noexcept { return sum_gram_nonneg_certified && sum_target_nonneg_certified; }
};

/// Sum of factored terms. Immutable once built; safe to share across threads.
struct SketchedMUProblem {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  std::vector<GramTerm> terms;
  Validity validity;
};

/// Checks every term against (m, n). Throws DimMismatch.
void validate(const SketchedMUProblem& p);

/// Problem from a record with orthonormal-row A, 0 <= lambda <= 1. A missing
/// sigma takes shift_sigma(A). With strict unset an insufficient sigma leaves
/// the problem uncertified instead of throwing.
SketchedMUProblem build_problem_one_sided_orthogonal(std::shared_ptr<const CompressedOneSided> c,
                                                     std::size_t r, double lambda,
                                                     std::optional<double> sigma = std::nullopt,
                                                     bool strict = true);

/// Any A, lambda >= 0.
SketchedMUProblem build_problem_one_sided_ridge(std::shared_ptr<const CompressedOneSided> c,
                                                std::size_t r, double lambda,
                                                std::optional<double> sigma = std::nullopt,
                                                bool strict = true);

/// sigma1 >= shift_sigma_regularized(A1, lambda1, Q1), sigma2 likewise on the right.
SketchedMUProblem build_problem_two_sided(std::shared_ptr<const CompressedTwoSided> c,
                                          std::size_t r, const RegularizationParams& params,
                                          bool strict = true);

/// Unscaled objective (no 1/2) with one entry per named term.
ObjectiveValue problem_objective(const SketchedMUProblem& p, const FactorPair& f);

/// problem_objective at U = 0, V = 0, without allocating factors.
double zero_factor_objective(const SketchedMUProblem& p);

/// Gradient of the 1/2-scaled objective.
FactorPair gradient(const SketchedMUProblem& p, const FactorPair& f);

}  // namespace sketchnmf
