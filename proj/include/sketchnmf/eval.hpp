#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sketchnmf/objectives.hpp"
#include "sketchnmf/sketching.hpp"
#include "sketchnmf/solver.hpp"

namespace sketchnmf {

/// ||X - UV^T||_F / ||X||_F. Throws ZeroData.
double relative_error(const DenseMatrix& x, const FactorPair& f);

/// <X, UV^T> / (||X||_F ||UV^T||_F), with the inner product taken as
/// Tr(V^T (X^T U)). Throws ZeroData, ZeroFactors.
double cosine_similarity(const DenseMatrix& x, const FactorPair& f);

/// ||X - P X||_F with P the orthogonal projector onto the row space of A.
double residual_projection_norm(const DenseMatrix& x, const SketchOperator& a);

struct MonotoneCheck {
  bool ok = true;
  /// First t with obj[t+1] > obj[t] (1 + slack).
  std::optional<std::size_t> first_violation;
};

MonotoneCheck check_monotone(const std::vector<double>& objectives, double slack_rel);
MonotoneCheck check_monotone(const std::vector<TracePoint>& trace, double slack_rel);

struct MetricsReport {
  double relative_error = 0.0;
  double cosine_similarity = 0.0;
  std::map<std::string, double> objective_terms;
  std::optional<double> residual_projection;
  std::optional<double> rescaled_relative_error;
};

nlohmann::json to_json(const MetricsReport& r);

/// Relative error of (1 + lambda) U V^T, the reconstruction the ridge bound
/// is stated for.
double rescaled_relative_error(const DenseMatrix& x, const FactorPair& f, double lambda);

}  // namespace sketchnmf
