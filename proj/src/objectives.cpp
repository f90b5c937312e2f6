#include "sketchnmf/objectives.hpp"

#include <algorithm>
#include <vector>

#include "sketchnmf/errors.hpp"
#include "sketchnmf/linalg.hpp"

namespace sketchnmf {

namespace {

void check_factors(const FactorPair& f, std::size_t m, std::size_t n) {
  if (f.u.rows() != m || f.v.rows() != n || f.u.cols() != f.v.cols()) {
    throw DimMismatch("factors are " + std::to_string(f.u.rows()) + "x" +
                      std::to_string(f.u.cols()) + " and " + std::to_string(f.v.rows()) + "x" +
                      std::to_string(f.v.cols()) + ", data is " + std::to_string(m) + "x" +
                      std::to_string(n));
  }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ||Y - (A U) V^T||^2 with A k x m, Y k x n.
double left_residual(const DenseMatrix& a, const DenseMatrix& y, const FactorPair& f) {
  const DenseMatrix au = matmul(a, f.u);
  double s = 0.0;
  for (std::size_t p = 0; p < y.rows(); ++p) {
    auto yp = y.row(p);
    auto aup = au.row(p);
    for (std::size_t j = 0; j < y.cols(); ++j) {
      const double d = yp[j] - dot(aup, f.v.row(j));
      s += d * d;
    }
  }
  return s;
}

// ||Y2 - U (V^T B)||^2 with B n x k, Y2 m x k.
double right_residual(const DenseMatrix& b, const DenseMatrix& y2, const FactorPair& f) {
  const DenseMatrix bv = matmul_tn(b, f.v);  // k x r, rows are (V^T B)^T
  double s = 0.0;
  for (std::size_t i = 0; i < y2.rows(); ++i) {
    auto ui = f.u.row(i);
    for (std::size_t p = 0; p < y2.cols(); ++p) {
      const double d = y2(i, p) - dot(ui, bv.row(p));
      s += d * d;
    }
  }
  return s;
}

std::vector<double> column_sums(const DenseMatrix& m) {
  std::vector<double> s(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) s[c] += row[c];
  }
  return s;
}

// ||s - O (F^T 1)||^2
double shift_residual(const Vector& s, const DenseMatrix& f, const DenseMatrix& o) {
  const std::vector<double> a = column_sums(f);
  double acc = 0.0;
  for (std::size_t j = 0; j < o.rows(); ++j) {
    const double d = s[j] - dot(a, o.row(j));
    acc += d * d;
  }
  return acc;
}

double clamp0(double v) noexcept { return std::max(v, 0.0); }

ObjectiveValue finish(std::map<std::string, double> terms) {
  ObjectiveValue v;
  for (const auto& [name, value] : terms) v.total += value;
  v.terms = std::move(terms);
  return v;
}

}  // namespace

ObjectiveValue obj_one_sided_orthogonal_terms(const CompressedOneSided& c, const FactorPair& f,
                                              double lambda, double sigma) {
  check_factors(f, c.m, c.n);
  const DenseMatrix gu = gram(f.u);
  const DenseMatrix gv = gram(f.v);
  const DenseMatrix au = matmul(c.a.matrix, f.u);
  const double reg = clamp0(frob_product_factored(gu, gv) - frob_product_factored(gram(au), gv));
  return finish({{"residual", left_residual(c.a.matrix, c.y, f)},
                 {"regularizer", lambda * reg},
                 {"shift", sigma * shift_residual(c.row_sums, f.u, f.v)}});
}

double obj_one_sided_orthogonal(const CompressedOneSided& c, const FactorPair& f, double lambda,
                                double sigma) {
  return obj_one_sided_orthogonal_terms(c, f, lambda, sigma).total;
}

ObjectiveValue obj_one_sided_ridge_terms(const CompressedOneSided& c, const FactorPair& f,
                                         double lambda, double sigma) {
  check_factors(f, c.m, c.n);
  const double reg = frob_product_factored(gram(f.u), gram(f.v));
  return finish({{"residual", left_residual(c.a.matrix, c.y, f)},
                 {"regularizer", lambda * reg},
                 {"shift", sigma * shift_residual(c.row_sums, f.u, f.v)}});
}

double obj_one_sided_ridge(const CompressedOneSided& c, const FactorPair& f, double lambda,
                           double sigma) {
  return obj_one_sided_ridge_terms(c, f, lambda, sigma).total;
}

ObjectiveValue obj_two_sided_terms(const CompressedTwoSided& c, const FactorPair& f,
                                   const RegularizationParams& params) {
  check_factors(f, c.m, c.n);
  const DenseMatrix gu = gram(f.u);
  const DenseMatrix gv = gram(f.v);
  const double full = frob_product_factored(gu, gv);
  const double in_q1 = frob_product_factored(gram(matmul_tn(c.q1, f.u)), gv);
  const double in_q2 = frob_product_factored(gu, gram(matmul_tn(c.q2, f.v)));
  return finish({{"residual_left", left_residual(c.a1.matrix, c.y1, f)},
                 {"residual_right", right_residual(c.a2.matrix, c.y2, f)},
                 {"regularizer_left", params.lambda1 * clamp0(full - in_q1)},
                 {"regularizer_right", params.lambda2 * clamp0(full - in_q2)},
                 {"shift_left", params.sigma1.value_or(0.0) * shift_residual(c.row_sums, f.u, f.v)},
                 {"shift_right",
                  params.sigma2.value_or(0.0) * shift_residual(c.col_sums, f.v, f.u)}});
}

double obj_two_sided(const CompressedTwoSided& c, const FactorPair& f,
                     const RegularizationParams& params) {
  return obj_two_sided_terms(c, f, params).total;
}

double obj_full(const DenseMatrix& x, const FactorPair& f) {
  check_factors(f, x.rows(), x.cols());
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    auto ui = f.u.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = xi[j] - dot(ui, f.v.row(j));
      s += d * d;
    }
  }
  return s;
}

}  // namespace sketchnmf
