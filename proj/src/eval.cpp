#include "sketchnmf/eval.hpp"

#include <algorithm>
#include <cmath>

#include "sketchnmf/errors.hpp"
#include "sketchnmf/linalg.hpp"

namespace sketchnmf {

namespace {

void check_shapes(const DenseMatrix& x, const FactorPair& f) {
  if (f.u.rows() != x.rows() || f.v.rows() != x.cols() || f.u.cols() != f.v.cols()) {
    throw DimMismatch("factors do not match the data");
  }
}

// <X, UV^T> = Tr(V^T (X^T U)), accumulated one row of X at a time.
double factored_inner(const DenseMatrix& x, const FactorPair& f) {
  const std::size_t r = f.u.cols();
  DenseMatrix xtu(x.cols(), r);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    auto ui = f.u.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (xi[j] == 0.0) continue;
      auto row = xtu.row(j);
      for (std::size_t c = 0; c < r; ++c) row[c] += xi[j] * ui[c];
    }
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto a = xtu.row(j);
    auto b = f.v.row(j);
    for (std::size_t c = 0; c < r; ++c) s += a[c] * b[c];
  }
  return s;
}

}  // namespace

double relative_error(const DenseMatrix& x, const FactorPair& f) {
  check_shapes(x, f);
  const double nx = frob_norm(x);
  if (nx == 0.0) throw ZeroData("relative error of an all-zero matrix");
  return std::sqrt(obj_full(x, f)) / nx;
}

double rescaled_relative_error(const DenseMatrix& x, const FactorPair& f, double lambda) {
  FactorPair scaled = f;
  for (double& v : scaled.u.data()) v *= 1.0 + lambda;
  return relative_error(x, scaled);
}

double cosine_similarity(const DenseMatrix& x, const FactorPair& f) {
  check_shapes(x, f);
  const double nx = frob_norm(x);
  if (nx == 0.0) throw ZeroData("cosine similarity with an all-zero matrix");
  const double nf = std::sqrt(std::max(frob_product_factored(gram(f.u), gram(f.v)), 0.0));
  if (nf == 0.0) throw ZeroFactors("cosine similarity with U V^T = 0");
  return factored_inner(x, f) / (nx * nf);
}

double residual_projection_norm(const DenseMatrix& x, const SketchOperator& a) {
  if (a.dim() != x.rows()) throw DimMismatch("operator does not match the data rows");
  // Basis of the compressed space as m x k columns.
  const DenseMatrix basis = a.side == Side::left ? transpose(a.matrix) : a.matrix;
  if (orthonormality_defect(a) <= 1e-12) {
    const double ax = frob_norm_sq(matmul_tn(basis, x));
    return std::sqrt(std::max(frob_norm_sq(x) - ax, 0.0));
  }
  const DenseMatrix q = qr_thin_truncated(basis).q;
  const DenseMatrix qtx = matmul_tn(q, x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto qi = q.row(i);
    auto xi = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double proj = 0.0;
      for (std::size_t p = 0; p < q.cols(); ++p) proj += qi[p] * qtx(p, j);
      const double d = xi[j] - proj;
      s += d * d;
    }
  }
  return std::sqrt(s);
}

MonotoneCheck check_monotone(const std::vector<double>& objectives, double slack_rel) {
  for (std::size_t t = 0; t + 1 < objectives.size(); ++t) {
    if (objectives[t + 1] > objectives[t] * (1.0 + slack_rel)) return {false, t};
  }
  return {};
}

MonotoneCheck check_monotone(const std::vector<TracePoint>& trace, double slack_rel) {
  std::vector<double> obj;
  obj.reserve(trace.size());
  for (const auto& pt : trace) obj.push_back(pt.objective);
  return check_monotone(obj, slack_rel);
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["relative_error"] = r.relative_error;
  j["cosine_similarity"] = r.cosine_similarity;
  j["objective_terms"] = r.objective_terms;
  j["residual_projection"] =
      r.residual_projection ? nlohmann::json(*r.residual_projection) : nlohmann::json(nullptr);
  j["rescaled_relative_error"] = r.rescaled_relative_error
                                     ? nlohmann::json(*r.rescaled_relative_error)
                                     : nlohmann::json(nullptr);
  return j;
}

}  // namespace sketchnmf
