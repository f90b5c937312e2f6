#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sketchnmf/matrix.hpp"

namespace sketchnmf {

enum class SketchKind { gaussian_iid, orthonormal_rows, rangefinder };
enum class Side { left, right };

std::string_view to_string(SketchKind kind) noexcept;
std::string_view to_string(Side side) noexcept;
SketchKind parse_sketch_kind(std::string_view s);
Side parse_side(std::string_view s);

/// A measurement matrix. Left sketches are k x m and act as A X; right
/// sketches are n x k and act as X B.
struct SketchOperator {
  DenseMatrix matrix;
  SketchKind kind = SketchKind::gaussian_iid;
  Side side = Side::left;
  std::uint64_t seed = 0;
  /// k asked for; differs from k() only when a rangefinder basis was truncated.
  std::size_t requested_k = 0;

  std::size_t k() const noexcept { return side == Side::left ? matrix.rows() : matrix.cols(); }
  /// Length of the data dimension the operator compresses (m or n).
  std::size_t dim() const noexcept { return side == Side::left ? matrix.cols() : matrix.rows(); }
};

/// Nonnegativity shift for the MU Gram sums.
struct ShiftSigma {
  double value = 0.0;
};

/// Which Gram the minimal shift is taken over. `gram` is the condition used by
/// the monotonicity argument (A^T A for left, A A^T for right sketches);
/// `sketch_rows` takes the k x k Gram of the sketch's rows instead.
enum class ShiftConvention { gram, sketch_rows };

/// i.i.d. N(0, variance) entries; variance defaults to 1/dim.
SketchOperator sample_gaussian_sketch(std::size_t k, std::size_t dim, std::uint64_t seed,
                                      std::optional<double> variance = std::nullopt,
                                      Side side = Side::left);

/// Orthonormal rows (left) or columns (right) from a thin QR of a Gaussian draw.
SketchOperator sample_orthonormal_sketch(std::size_t k, std::size_t dim, std::uint64_t seed,
                                         Side side = Side::left);

/// Data-adapted sketch. Left: Q = qr(X S) with S an n x k Gaussian, A = Q^T.
/// Right: Q = qr((S X)^T) with S a k x m Gaussian, B = Q. Dependent columns of
/// the range sample are dropped, so k() may be smaller than k.
SketchOperator rangefinder_sketch(const DenseMatrix& x, std::size_t k, std::uint64_t seed,
                                  Side side = Side::left);

/// Smallest sigma with (Gram + sigma 1 1^T) entrywise nonnegative.
ShiftSigma shift_sigma(const SketchOperator& a, ShiftConvention convention = ShiftConvention::gram);

/// max of the negative-part maxima of Gram and Gram + lambda (I - Q Q^T).
/// Q must have orthonormal columns and dim() rows.
ShiftSigma shift_sigma_regularized(const SketchOperator& a, double lambda, const DenseMatrix& q);

/// max_i |s_i(A) - 1|.
double approx_orthogonality_epsilon(const SketchOperator& a);

/// ||A A^T - I||_max for left operators, ||B^T B - I||_max for right ones.
double orthonormality_defect(const SketchOperator& a);

/// Everything a one-sided solver may read.
struct CompressedOneSided {
  SketchOperator a;
  DenseMatrix y;       // k x n, A X
  Vector row_sums;     // n, 1_m^T X
  double x_frob = 0.0;
  std::size_t m = 0, n = 0, k = 0;
};

struct CompressedTwoSided {
  SketchOperator a1;   // left, k x m
  SketchOperator a2;   // right, n x k
  DenseMatrix y1;      // k x n, A1 X
  DenseMatrix y2;      // m x k, X A2
  Vector row_sums;     // n, 1_m^T X
  Vector col_sums;     // m, X 1_n
  DenseMatrix q1;      // m x k1, orthonormal basis of col(X A2)
  DenseMatrix q2;      // n x k2, orthonormal basis of row(A1 X)
  double x_frob = 0.0;
  std::size_t m = 0, n = 0, k = 0;
  std::size_t q1_dropped = 0;
  std::size_t q2_dropped = 0;
};

/// Single pass over X. Throws NegativeData on the first negative entry.
CompressedOneSided compress_one_sided(const DenseMatrix& x, SketchOperator a);
CompressedTwoSided compress_two_sided(const DenseMatrix& x, SketchOperator a1, SketchOperator a2);

/// Element counts of the stored record. memory_ratio counts the operators and
/// sketches only (|A| + |AX|, plus |A2| + |XA2| two-sided), relative to m*n.
struct StorageFootprint {
  std::size_t sketch_elements = 0;
  std::size_t sum_elements = 0;
  std::size_t basis_elements = 0;
  std::size_t dense_elements = 0;
  double memory_ratio = 0.0;
};

StorageFootprint storage_footprint(const CompressedOneSided& c);
StorageFootprint storage_footprint(const CompressedTwoSided& c);

/// Directory layout: manifest.json plus CSV files (A/Y/row_sums one-sided;
/// A1/A2/Y1/Y2/row_sums/col_sums/Q1/Q2 two-sided).
void save_record(const std::filesystem::path& dir, const CompressedOneSided& c);
void save_record(const std::filesystem::path& dir, const CompressedTwoSided& c);
CompressedOneSided load_one_sided(const std::filesystem::path& dir);
CompressedTwoSided load_two_sided(const std::filesystem::path& dir);
/// "one_sided" or "two_sided", read from the manifest.
std::string record_shape(const std::filesystem::path& dir);

}  // namespace sketchnmf
