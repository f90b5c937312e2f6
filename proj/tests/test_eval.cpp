#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "oracles.hpp"
#include "sketchnmf/errors.hpp"
#include "sketchnmf/eval.hpp"

using namespace sketchnmf;

TEST(Eval, RelativeErrorOfExactFactorsIsZero) {
  oracle::Gen g(1);
  const auto f = instances::factors(g, 7, 5, 2);
  const DenseMatrix x = oracle::mul(f.u, oracle::tr(f.v));
  EXPECT_LT(relative_error(x, {f.u, f.v}), 1e-15);
  EXPECT_NEAR(cosine_similarity(x, {f.u, f.v}), 1.0, 1e-14);
}

TEST(Eval, RelativeErrorSmallCase) {
  const DenseMatrix x{{3.0, 0.0}, {0.0, 4.0}};
  const FactorPair f{DenseMatrix{{1.0}, {0.0}}, DenseMatrix{{3.0}, {0.0}}};
  EXPECT_DOUBLE_EQ(relative_error(x, f), 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(x, f), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(rescaled_relative_error(x, {f.u, DenseMatrix{{1.5}, {0.0}}}, 1.0), 4.0 / 5.0);
}

TEST(Eval, MatchesDenseFormulas) {
  oracle::Gen g(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = g.integer(2, 20), n = g.integer(2, 20), r = g.integer(1, 4);
    const DenseMatrix x = instances::data(g, m, n);
    const auto f = instances::factors(g, m, n, r);
    const DenseMatrix w = oracle::mul(f.u, oracle::tr(f.v));
    const double rel = std::sqrt(oracle::fro2(oracle::add(x, w, -1.0)) / oracle::fro2(x));
    double ip = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ip += x.data()[i] * w.data()[i];
    const double cos = ip / std::sqrt(oracle::fro2(x) * oracle::fro2(w));
    EXPECT_NEAR(relative_error(x, {f.u, f.v}), rel, 1e-12 * rel);
    EXPECT_NEAR(cosine_similarity(x, {f.u, f.v}), cos, 1e-12);
    const double lam = g.uniform(0, 1);
    const double rs = std::sqrt(oracle::fro2(oracle::add(x, w, -(1 + lam))) / oracle::fro2(x));
    EXPECT_NEAR(rescaled_relative_error(x, {f.u, f.v}, lam), rs, 1e-12 * rs);
  }
}

TEST(Eval, CosineIsScaleInvariant) {
  oracle::Gen g(3);
  const DenseMatrix x = instances::data(g, 9, 8);
  const auto f = instances::factors(g, 9, 8, 3);
  const double c = cosine_similarity(x, {f.u, f.v});
  EXPECT_NEAR(cosine_similarity(x, {oracle::scale(f.u, 7.5), f.v}), c, 1e-14);
  EXPECT_GE(c, 0.0);
  EXPECT_LE(c, 1.0);
}

TEST(Eval, ZeroInputs) {
  const DenseMatrix zero(3, 2);
  const FactorPair f{DenseMatrix{{1.0}, {1.0}, {1.0}}, DenseMatrix{{1.0}, {1.0}}};
  EXPECT_THROW(relative_error(zero, f), ZeroData);
  EXPECT_THROW(cosine_similarity(zero, f), ZeroData);
  const DenseMatrix x{{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  EXPECT_THROW(cosine_similarity(x, {DenseMatrix(3, 1), DenseMatrix(2, 1)}), ZeroFactors);
  EXPECT_THROW(relative_error(x, {DenseMatrix(2, 1), DenseMatrix(2, 1)}), DimMismatch);
}

TEST(Eval, ResidualProjectionMatchesDense) {
  oracle::Gen g(4);
  for (int t = 0; t < 10; ++t) {
    const std::size_t m = g.integer(4, 20), n = g.integer(2, 15);
    const std::size_t k = g.integer(1, m - 1);
    const DenseMatrix x = instances::data(g, m, n);
    for (bool orth : {true, false}) {
      const SketchOperator a = orth ? sample_orthonormal_sketch(k, m, t) : sample_gaussian_sketch(k, m, t);
      const DenseMatrix q = oracle::orth(oracle::tr(a.matrix));
      const DenseMatrix res = oracle::add(x, oracle::mul(q, oracle::mul(oracle::tr(q), x)), -1.0);
      const double want = std::sqrt(oracle::fro2(res));
      EXPECT_NEAR(residual_projection_norm(x, a), want, 1e-10 * std::sqrt(oracle::fro2(x)));
    }
  }
}

TEST(Eval, FullRankSketchLeavesNoResidual) {
  oracle::Gen g(5);
  const DenseMatrix x = instances::data(g, 6, 4);
  EXPECT_LT(residual_projection_norm(x, sample_gaussian_sketch(6, 6, 1)), 1e-10);
}

TEST(Eval, MonotoneCheck) {
  EXPECT_TRUE(check_monotone(std::vector<double>{3, 2, 2, 1}, 0.0).ok);
  const MonotoneCheck bad = check_monotone(std::vector<double>{3, 2, 2.5, 1, 4}, 0.0);
  EXPECT_FALSE(bad.ok);
  ASSERT_TRUE(bad.first_violation);
  EXPECT_EQ(*bad.first_violation, 1u);
  EXPECT_TRUE(check_monotone(std::vector<double>{1.0, 1.0 + 1e-13}, 1e-12).ok);
  EXPECT_FALSE(check_monotone(std::vector<double>{1.0, 1.0 + 1e-11}, 1e-12).ok);
  EXPECT_TRUE(check_monotone(std::vector<double>{}, 0.0).ok);
  std::vector<TracePoint> trace{{0, 5.0, {}, 0.0}, {1, 4.0, {}, 0.0}, {2, 4.5, {}, 0.0}};
  EXPECT_EQ(check_monotone(trace, 1e-12).first_violation.value_or(99), 1u);
}

TEST(Eval, MetricsJson) {
  MetricsReport r;
  r.relative_error = 0.5;
  r.cosine_similarity = 0.9;
  r.objective_terms = {{"residual", 1.0}};
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j.at("relative_error").get<double>(), 0.5);
  EXPECT_EQ(j.at("cosine_similarity").get<double>(), 0.9);
  EXPECT_EQ(j.at("objective_terms").at("residual").get<double>(), 1.0);
  EXPECT_TRUE(j.at("residual_projection").is_null());
  r.residual_projection = 0.25;
  EXPECT_EQ(to_json(r).at("residual_projection").get<double>(), 0.25);
}
