#include "sketchnmf/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "sketchnmf/errors.hpp"
#include "sketchnmf/linalg.hpp"
#include "sketchnmf/rng.hpp"

namespace sketchnmf {

SyntheticData synthetic_lognormal(const SyntheticSpec& spec, std::size_t budget) {
  if (spec.m == 0 || spec.n == 0 || spec.r == 0 || spec.r > std::min(spec.m, spec.n)) {
    throw InvalidDim("synthetic data needs 1 <= r <= min(m, n)");
  }
  if (spec.m > budget / spec.n) throw DimOverflow("synthetic matrix exceeds dense budget");
  auto draw = [&](std::size_t rows, std::uint64_t stream) {
    CounterRng rng(spec.seed, stream);
    DenseMatrix f(rows, spec.r);
    for (double& v : f.data()) v = std::exp(rng.normal());
    return f;
  };
  FactorPair truth{draw(spec.m, 6), draw(spec.n, 7)};
  DenseMatrix x = matmul_nt(truth.u, truth.v);
  return {std::move(x), std::move(truth)};
}

MatrixFormat parse_matrix_format(std::string_view s) {
  if (s == "csv_dense" || s == "csv") return MatrixFormat::csv_dense;
  if (s == "matrix_market" || s == "mtx") return MatrixFormat::matrix_market;
  throw ConfigError("unknown matrix format '" + std::string(s) + "'");
}

std::string_view to_string(MatrixFormat f) noexcept {
  return f == MatrixFormat::csv_dense ? "csv_dense" : "matrix_market";
}

DenseMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format,
                        std::size_t budget) {
  DenseMatrix x = format == MatrixFormat::csv_dense ? io::read_matrix_csv(path, budget)
                                                     : io::read_matrix_market(path, budget);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (x(i, j) < 0.0) throw NegativeData(i, j);
  return x;
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& x, MatrixFormat format) {
  if (format == MatrixFormat::csv_dense) {
    io::write_matrix_csv(path, x);
  } else {
    io::write_matrix_market(path, x);
  }
}

}  // namespace sketchnmf
