#include "sketchnmf/sketching.hpp"

#include <algorithm>
#include <cmath>

#include "sketchnmf/errors.hpp"
#include "sketchnmf/io.hpp"
#include "sketchnmf/linalg.hpp"
#include "sketchnmf/rng.hpp"

namespace sketchnmf {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SketchKind kind) noexcept {
  switch (kind) {
    case SketchKind::gaussian_iid: return "gaussian_iid";
    case SketchKind::orthonormal_rows: return "orthonormal_rows";
    case SketchKind::rangefinder: return "rangefinder";
  }
  return "unknown";
}

std::string_view to_string(Side side) noexcept { return side == Side::left ? "left" : "right"; }

SketchKind parse_sketch_kind(std::string_view s) {
  if (s == "gaussian_iid" || s == "gaussian") return SketchKind::gaussian_iid;
  if (s == "orthonormal_rows" || s == "orthonormal") return SketchKind::orthonormal_rows;
  if (s == "rangefinder") return SketchKind::rangefinder;
  throw ConfigError("unknown sketch kind '" + std::string(s) + "'");
}

Side parse_side(std::string_view s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw ConfigError("unknown side '" + std::string(s) + "'");
}

namespace {

// dim x k matrix whose i-th row is the k-vector the operator attaches to data index i.
DenseMatrix index_vectors(const SketchOperator& a) {
  return a.side == Side::left ? transpose(a.matrix) : a.matrix;
}

DenseMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t stream,
                     double stddev) {
  CounterRng rng(seed, stream);
  DenseMatrix g(rows, cols);
  for (double& v : g.data()) v = stddev * rng.normal();
  return g;
}

void require_nonnegative(const DenseMatrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (x(i, j) < 0.0) throw NegativeData(i, j);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Left and right operators drawn from one seed must be independent.
std::uint64_t sketch_stream(Side side) noexcept { return side == Side::left ? 0 : 1; }
std::uint64_t range_stream(Side side) noexcept { return side == Side::left ? 2 : 3; }

}  // namespace

SketchOperator sample_gaussian_sketch(std::size_t k, std::size_t dim, std::uint64_t seed,
                                      std::optional<double> variance, Side side) {
  if (k == 0 || dim == 0) throw InvalidDim("gaussian sketch needs k >= 1 and dim >= 1");
  const double var = variance.value_or(1.0 / static_cast<double>(dim));
  if (!(var > 0.0)) throw InvalidDim("gaussian sketch variance must be positive");
  const double sd = std::sqrt(var);
  DenseMatrix m = side == Side::left ? gaussian(k, dim, seed, sketch_stream(side), sd)
                                     : gaussian(dim, k, seed, sketch_stream(side), sd);
  return {std::move(m), SketchKind::gaussian_iid, side, seed, k};
}

SketchOperator sample_orthonormal_sketch(std::size_t k, std::size_t dim, std::uint64_t seed,
                                         Side side) {
  if (k == 0 || dim == 0) throw InvalidDim("orthonormal sketch needs k >= 1 and dim >= 1");
  if (k > dim) throw InvalidDim("orthonormal sketch needs k <= dim");
  DenseMatrix q = qr_thin(gaussian(dim, k, seed, sketch_stream(side), 1.0));
  if (side == Side::left) q = transpose(q);
  return {std::move(q), SketchKind::orthonormal_rows, side, seed, k};
}

SketchOperator rangefinder_sketch(const DenseMatrix& x, std::size_t k, std::uint64_t seed,
                                  Side side) {
  if (k == 0 || k > std::min(x.rows(), x.cols())) {
    throw InvalidDim("rangefinder needs 1 <= k <= min(m, n)");
  }
  if (side == Side::left) {
    const DenseMatrix s = gaussian(x.cols(), k, seed, range_stream(side), 1.0);
    auto qr = qr_thin_truncated(matmul(x, s));
    return {transpose(qr.q), SketchKind::rangefinder, side, seed, k};
  }
  const DenseMatrix s = gaussian(k, x.rows(), seed, range_stream(side), 1.0);
  // (S X)^T = X^T S^T
  auto qr = qr_thin_truncated(matmul_tn(x, transpose(s)));
  return {std::move(qr.q), SketchKind::rangefinder, side, seed, k};
}

ShiftSigma shift_sigma(const SketchOperator& a, ShiftConvention convention) {
  double worst = 0.0;
  if (convention == ShiftConvention::sketch_rows) {
    const DenseMatrix g = a.side == Side::left ? matmul_nt(a.matrix, a.matrix) : gram(a.matrix);
    for (double v : g.data()) worst = std::max(worst, -v);
    return {worst};
  }
  const DenseMatrix vecs = index_vectors(a);
  for (std::size_t i = 0; i < vecs.rows(); ++i) {
    auto vi = vecs.row(i);
    for (std::size_t j = i + 1; j < vecs.rows(); ++j) worst = std::max(worst, -dot(vi, vecs.row(j)));
  }
  // Diagonal entries are squared norms and never negative.
  return {worst};
}

ShiftSigma shift_sigma_regularized(const SketchOperator& a, double lambda, const DenseMatrix& q) {
  if (q.rows() != a.dim()) {
    throw DimMismatch("shift_sigma_regularized: basis has " + std::to_string(q.rows()) +
                      " rows, operator dimension is " + std::to_string(a.dim()));
  }
  if (lambda < 0.0) throw LambdaOutOfRange("lambda must be nonnegative");
  const DenseMatrix vecs = index_vectors(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < vecs.rows(); ++i) {
    auto vi = vecs.row(i);
    auto qi = q.row(i);
    for (std::size_t j = i; j < vecs.rows(); ++j) {
      const double g = dot(vi, vecs.row(j));
      const double proj = (i == j ? 1.0 : 0.0) - dot(qi, q.row(j));
      worst = std::max({worst, -g, -(g + lambda * proj)});
    }
  }
  return {worst};
}

double approx_orthogonality_epsilon(const SketchOperator& a) {
  const Vector sv = singular_values(a.matrix);
  double eps = 0.0;
  for (double s : sv.data()) eps = std::max(eps, std::abs(s - 1.0));
  return eps;
}

double orthonormality_defect(const SketchOperator& a) {
  const DenseMatrix g = a.side == Side::left ? matmul_nt(a.matrix, a.matrix) : gram(a.matrix);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

CompressedOneSided compress_one_sided(const DenseMatrix& x, SketchOperator a) {
  if (a.side != Side::left) throw DimMismatch("one-sided compression needs a left operator");
  if (a.dim() != x.rows()) {
    throw DimMismatch("operator has " + std::to_string(a.dim()) + " columns, X has " +
                      std::to_string(x.rows()) + " rows");
  }
  require_nonnegative(x);
  const std::size_t m = x.rows(), n = x.cols(), k = a.k();

  DenseMatrix y(k, n);
  Vector row_sums(n);
  double frob = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto xi = x.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double api = a.matrix(p, i);
      auto yp = y.row(p);
      for (std::size_t j = 0; j < n; ++j) yp[j] += api * xi[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      row_sums[j] += xi[j];
      frob += xi[j] * xi[j];
    }
  }
  return {std::move(a), std::move(y), std::move(row_sums), std::sqrt(frob), m, n, k};
}

CompressedTwoSided compress_two_sided(const DenseMatrix& x, SketchOperator a1, SketchOperator a2) {
  if (a1.side != Side::left || a2.side != Side::right) {
    throw DimMismatch("two-sided compression needs a left and a right operator");
  }
  if (a1.dim() != x.rows() || a2.dim() != x.cols()) {
    throw DimMismatch("operator dimensions do not match X");
  }
  require_nonnegative(x);
  const std::size_t m = x.rows(), n = x.cols();
  const std::size_t k1 = a1.k(), k2 = a2.k();

  DenseMatrix y1(k1, n);
  DenseMatrix y2(m, k2);
  Vector row_sums(n);
  Vector col_sums(m);
  double frob = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto xi = x.row(i);
    for (std::size_t p = 0; p < k1; ++p) {
      const double api = a1.matrix(p, i);
      auto yp = y1.row(p);
      for (std::size_t j = 0; j < n; ++j) yp[j] += api * xi[j];
    }
    auto y2i = y2.row(i);
    double cs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      auto bj = a2.matrix.row(j);
      for (std::size_t p = 0; p < k2; ++p) y2i[p] += xi[j] * bj[p];
      row_sums[j] += xi[j];
      cs += xi[j];
      frob += xi[j] * xi[j];
    }
    col_sums[i] = cs;
  }

  auto q1 = qr_thin_truncated(y2);
  auto q2 = qr_thin_truncated(transpose(y1));
  CompressedTwoSided c{std::move(a1), std::move(a2),     std::move(y1),  std::move(y2),
                       std::move(row_sums), std::move(col_sums), std::move(q1.q), std::move(q2.q),
                       std::sqrt(frob), m, n, k1, q1.dropped.size(), q2.dropped.size()};
  return c;
}

StorageFootprint storage_footprint(const CompressedOneSided& c) {
  StorageFootprint f;
  f.sketch_elements = c.a.matrix.size() + c.y.size();
  f.sum_elements = c.row_sums.size();
  f.dense_elements = c.m * c.n;
  f.memory_ratio = static_cast<double>(f.sketch_elements) / static_cast<double>(f.dense_elements);
  return f;
}

StorageFootprint storage_footprint(const CompressedTwoSided& c) {
  StorageFootprint f;
  f.sketch_elements = c.a1.matrix.size() + c.a2.matrix.size() + c.y1.size() + c.y2.size();
  f.sum_elements = c.row_sums.size() + c.col_sums.size();
  f.basis_elements = c.q1.size() + c.q2.size();
  f.dense_elements = c.m * c.n;
  f.memory_ratio = static_cast<double>(f.sketch_elements) / static_cast<double>(f.dense_elements);
  return f;
}

namespace {

json footprint_json(const StorageFootprint& f) {
  return {{"sketch_elements", f.sketch_elements},
          {"sum_elements", f.sum_elements},
          {"basis_elements", f.basis_elements},
          {"dense_elements", f.dense_elements},
          {"memory_ratio", f.memory_ratio}};
}

json operator_json(const SketchOperator& a) {
  return {{"kind", to_string(a.kind)},
          {"side", to_string(a.side)},
          {"seed", a.seed},
          {"k", a.k()},
          {"requested_k", a.requested_k}};
}

SketchOperator operator_from(const json& j, DenseMatrix matrix) {
  SketchOperator a{std::move(matrix), parse_sketch_kind(j.at("kind").get<std::string>()),
                   parse_side(j.at("side").get<std::string>()), j.at("seed").get<std::uint64_t>(),
                   j.at("requested_k").get<std::size_t>()};
  if (a.k() != j.at("k").get<std::size_t>()) throw DimMismatch("operator file disagrees with manifest k");
  return a;
}

json read_manifest(const fs::path& dir) {
  try {
    return io::read_json(dir / "manifest.json");
  } catch (const IoError&) {
    throw IoError("no manifest.json in " + dir.string());
  }
}

}  // namespace

void save_record(const fs::path& dir, const CompressedOneSided& c) {
  fs::create_directories(dir);
  io::write_matrix_csv(dir / "A.csv", c.a.matrix);
  io::write_matrix_csv(dir / "Y.csv", c.y);
  io::write_vector_csv(dir / "row_sums.csv", c.row_sums);
  json manifest = {{"record", "one_sided"},
                   {"kind", to_string(c.a.kind)},
                   {"side", to_string(c.a.side)},
                   {"seed", c.a.seed},
                   {"k", c.k},
                   {"m", c.m},
                   {"n", c.n},
                   {"x_frob", c.x_frob},
                   {"sigma", shift_sigma(c.a).value},
                   {"rng", kRngName},
                   {"operator", operator_json(c.a)},
                   {"memory", footprint_json(storage_footprint(c))}};
  io::write_json(dir / "manifest.json", manifest);
}

void save_record(const fs::path& dir, const CompressedTwoSided& c) {
  fs::create_directories(dir);
  io::write_matrix_csv(dir / "A1.csv", c.a1.matrix);
  io::write_matrix_csv(dir / "A2.csv", c.a2.matrix);
  io::write_matrix_csv(dir / "Y1.csv", c.y1);
  io::write_matrix_csv(dir / "Y2.csv", c.y2);
  io::write_vector_csv(dir / "row_sums.csv", c.row_sums);
  io::write_vector_csv(dir / "col_sums.csv", c.col_sums);
  io::write_matrix_csv(dir / "Q1.csv", c.q1);
  io::write_matrix_csv(dir / "Q2.csv", c.q2);
  json manifest = {{"record", "two_sided"},
                   {"kind", to_string(c.a1.kind)},
                   {"side", "both"},
                   {"seed", c.a1.seed},
                   {"k", c.k},
                   {"m", c.m},
                   {"n", c.n},
                   {"x_frob", c.x_frob},
                   {"sigma", shift_sigma(c.a1).value},
                   {"sigma2", shift_sigma(c.a2).value},
                   {"rng", kRngName},
                   {"operator1", operator_json(c.a1)},
                   {"operator2", operator_json(c.a2)},
                   {"q1_dropped", c.q1_dropped},
                   {"q2_dropped", c.q2_dropped},
                   {"memory", footprint_json(storage_footprint(c))}};
  io::write_json(dir / "manifest.json", manifest);
}

std::string record_shape(const fs::path& dir) {
  return read_manifest(dir).at("record").get<std::string>();
}

CompressedOneSided load_one_sided(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  if (manifest.at("record") != "one_sided") throw ConfigError(dir.string() + " is not a one-sided record");
  SketchOperator a = operator_from(manifest.at("operator"), io::read_matrix_csv(dir / "A.csv"));
  DenseMatrix y = io::read_matrix_csv(dir / "Y.csv");
  Vector row_sums = io::read_vector_csv(dir / "row_sums.csv");
  const auto m = manifest.at("m").get<std::size_t>();
  const auto n = manifest.at("n").get<std::size_t>();
  const auto k = manifest.at("k").get<std::size_t>();
  if (a.dim() != m || y.rows() != k || y.cols() != n || row_sums.size() != n) {
    throw DimMismatch("record files disagree with manifest dimensions");
  }
  return {std::move(a), std::move(y), std::move(row_sums), manifest.at("x_frob").get<double>(), m, n, k};
}

CompressedTwoSided load_two_sided(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  if (manifest.at("record") != "two_sided") throw ConfigError(dir.string() + " is not a two-sided record");
  SketchOperator a1 = operator_from(manifest.at("operator1"), io::read_matrix_csv(dir / "A1.csv"));
  SketchOperator a2 = operator_from(manifest.at("operator2"), io::read_matrix_csv(dir / "A2.csv"));
  CompressedTwoSided c{std::move(a1),
                       std::move(a2),
                       io::read_matrix_csv(dir / "Y1.csv"),
                       io::read_matrix_csv(dir / "Y2.csv"),
                       io::read_vector_csv(dir / "row_sums.csv"),
                       io::read_vector_csv(dir / "col_sums.csv"),
                       io::read_matrix_csv(dir / "Q1.csv"),
                       io::read_matrix_csv(dir / "Q2.csv"),
                       manifest.at("x_frob").get<double>(),
                       manifest.at("m").get<std::size_t>(),
                       manifest.at("n").get<std::size_t>(),
                       manifest.at("k").get<std::size_t>(),
                       manifest.at("q1_dropped").get<std::size_t>(),
                       manifest.at("q2_dropped").get<std::size_t>()};
  if (c.a1.dim() != c.m || c.a2.dim() != c.n || c.y1.cols() != c.n || c.y2.rows() != c.m ||
      c.q1.rows() != c.m || c.q2.rows() != c.n) {
    throw DimMismatch("record files disagree with manifest dimensions");
  }
  return c;
}

}  // namespace sketchnmf
