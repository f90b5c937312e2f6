#pragma once

#include <cstddef>
#include <vector>

#include "sketchnmf/matrix.hpp"

namespace sketchnmf {

/// Relative threshold (against ||M||_F) below which a QR column counts as dependent.
inline constexpr double kRankTolerance = 1e-12;

DenseMatrix transpose(const DenseMatrix& a);

/// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

/// M^T M.
DenseMatrix gram(const DenseMatrix& m);

double frob_norm_sq(const DenseMatrix& m) noexcept;
double frob_norm(const DenseMatrix& m) noexcept;
double squared_norm(const Vector& v) noexcept;

/// Tr(Gu * Gv). With Gu = U^T U and Gv = V^T V this is ||U V^T||_F^2.
double frob_product_factored(const DenseMatrix& gu, const DenseMatrix& gv);

/// Thin Householder QR: an m x p matrix with orthonormal columns spanning col(M).
/// The implied triangular factor has a nonnegative diagonal.
/// Throws RankDeficient(j) when column j is dependent on the earlier ones.
DenseMatrix qr_thin(const DenseMatrix& m);

struct TruncatedQr {
  DenseMatrix q;
  /// Input columns skipped because they were numerically dependent.
  std::vector<std::size_t> dropped;
};

/// Same as qr_thin but skips dependent columns instead of throwing, which also
/// allows p > m; q has p - dropped.size() columns. Throws RankDeficient(0) if nothing survives.
TruncatedQr qr_thin_truncated(const DenseMatrix& m);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), descending.
Vector symmetric_eigenvalues(const DenseMatrix& s);

/// Singular values, descending, length min(rows, cols). Computed from the
/// eigenvalues of the smaller Gram matrix, so accuracy is relative to sigma_max.
Vector singular_values(const DenseMatrix& m);

}  // namespace sketchnmf
