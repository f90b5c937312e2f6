#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sketchnmf/alloc_audit.hpp"
#include "sketchnmf/errors.hpp"
#include "sketchnmf/linalg.hpp"
#include "sketchnmf/rng.hpp"

using namespace sketchnmf;

TEST(DenseMatrix, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(DenseMatrix(0, 3), InvalidDim);
  EXPECT_THROW(DenseMatrix(2, 0), InvalidDim);
  const double bad[] = {1.0, std::nan("")};
  EXPECT_THROW(DenseMatrix(1, 2, bad), InvalidDim);
  const double three[] = {1.0, 2.0, 3.0};
  EXPECT_THROW(DenseMatrix(2, 2, three), DimMismatch);
  EXPECT_THROW(Vector(0), InvalidDim);
}

TEST(DenseMatrix, IdentityAndAccess) {
  const DenseMatrix i3 = DenseMatrix::identity(3);
  EXPECT_EQ(i3(1, 1), 1.0);
  EXPECT_EQ(i3(0, 2), 0.0);
  const DenseMatrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.row(1)[2], 6.0);
  EXPECT_TRUE(m.all_nonnegative());
}

TEST(Linalg, ProductsMatchNaive) {
  oracle::Gen g(1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t a = g.integer(1, 9), b = g.integer(1, 9), c = g.integer(1, 9);
    const DenseMatrix x = g.gaussian(a, b), y = g.gaussian(b, c), z = g.gaussian(a, c);
    EXPECT_LT(oracle::max_abs_diff(matmul(x, y), oracle::mul(x, y)), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(matmul_tn(x, z), oracle::mul(oracle::tr(x), z)), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(matmul_nt(x, oracle::tr(y)), oracle::mul(x, y)), 1e-12);
    EXPECT_EQ(transpose(x), oracle::tr(x));
    const DenseMatrix gx = gram(x);
    EXPECT_LT(oracle::max_abs_diff(gx, oracle::mul(oracle::tr(x), x)), 1e-12);
    EXPECT_EQ(gx, transpose(gx));
  }
  EXPECT_THROW(matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), DimMismatch);
}

TEST(Linalg, FactoredFrobeniusIdentity) {
  oracle::Gen g(2);
  const DenseMatrix u = g.gaussian(12, 3), v = g.gaussian(9, 3);
  const double direct = oracle::fro2(oracle::mul(u, oracle::tr(v)));
  EXPECT_NEAR(frob_product_factored(gram(u), gram(v)), direct, 1e-10 * direct);
  EXPECT_THROW(frob_product_factored(DenseMatrix(2, 2), DenseMatrix(3, 3)), DimMismatch);
  EXPECT_NEAR(frob_norm_sq(u), oracle::fro2(u), 1e-12);
  EXPECT_NEAR(squared_norm(Vector{3.0, 4.0}), 25.0, 0.0);
}

TEST(Linalg, QrIsOrthonormalWithNonnegativeDiagonal) {
  oracle::Gen g(3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t rows = g.integer(1, 15);
    const std::size_t cols = g.integer(1, rows);
    const DenseMatrix m = g.gaussian(rows, cols);
    const DenseMatrix q = qr_thin(m);
    ASSERT_EQ(q.cols(), cols);
    EXPECT_LT(oracle::max_abs_diff(oracle::mul(oracle::tr(q), q), oracle::eye(cols)), 1e-12);
    const DenseMatrix r = oracle::mul(oracle::tr(q), m);
    for (std::size_t i = 0; i < cols; ++i) {
      EXPECT_GE(r(i, i), 0.0);
      for (std::size_t j = 0; j < i; ++j) EXPECT_NEAR(r(i, j), 0.0, 1e-12);
    }
    EXPECT_LT(oracle::max_abs_diff(oracle::mul(q, r), m), 1e-12);
  }
}

TEST(Linalg, QrRankDeficiency) {
  DenseMatrix m{{1, 2, 1}, {2, 4, 0}, {3, 6, 1}, {4, 8, 0}};
  try {
    qr_thin(m);
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.column(), 1u);
  }
  const TruncatedQr t = qr_thin_truncated(m);
  EXPECT_EQ(t.q.cols(), 2u);
  ASSERT_EQ(t.dropped.size(), 1u);
  EXPECT_EQ(t.dropped[0], 1u);
  EXPECT_THROW(qr_thin_truncated(DenseMatrix(3, 2)), RankDeficient);
  EXPECT_THROW(qr_thin(DenseMatrix(2, 3)), InvalidDim);
}

TEST(Linalg, IdentityQr) {
  EXPECT_LT(oracle::max_abs_diff(qr_thin(DenseMatrix::identity(4)), oracle::eye(4)), 0.0 + 1e-15);
}

TEST(Linalg, SingularValuesMatchJacobiOracle) {
  oracle::Gen g(4);
  for (int t = 0; t < 10; ++t) {
    const DenseMatrix m = g.gaussian(g.integer(1, 12), g.integer(1, 12));
    const Vector sv = singular_values(m);
    const auto ref = oracle::svd_values(m);
    ASSERT_EQ(sv.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(sv[i], ref[i], 1e-10 * ref[0]);
  }
}

TEST(Linalg, SymmetricEigenvaluesKnownMatrix) {
  const DenseMatrix s{{2, 1}, {1, 2}};
  const Vector e = symmetric_eigenvalues(s);
  EXPECT_NEAR(e[0], 3.0, 1e-14);
  EXPECT_NEAR(e[1], 1.0, 1e-14);
}

TEST(AllocationAudit, CountsMatrixStorage) {
  AllocationAudit audit;
  {
    DenseMatrix a(10, 20);
    DenseMatrix b(3, 3);
    EXPECT_EQ(audit.stats().largest_allocation, 200u);
    EXPECT_EQ(audit.stats().live, 209u);
  }
  EXPECT_EQ(audit.stats().live, 0u);
  EXPECT_EQ(audit.stats().peak_live, 209u);
  EXPECT_EQ(audit.stats().allocation_count, 2u);
}

TEST(Rng, CounterStreamsAreDeterministicAndDistinct) {
  CounterRng a(7, 0), b(7, 0), c(7, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  CounterRng n(9);
  double s = 0, s2 = 0;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double z = n.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / count, 0.0, 0.01);
  EXPECT_NEAR(s2 / count, 1.0, 0.02);
}
