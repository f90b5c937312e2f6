#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "sketchnmf/io.hpp"
#include "sketchnmf/matrix.hpp"
#include "sketchnmf/objectives.hpp"

namespace sketchnmf {

enum class Distribution { standard_lognormal };

struct SyntheticSpec {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
  Distribution distribution = Distribution::standard_lognormal;
};

struct SyntheticData {
  DenseMatrix x;
  FactorPair truth;
};

/// U, V with exp(N(0,1)) entries and X = U V^T. Throws InvalidDim unless
/// 1 <= r <= min(m, n), DimOverflow past the dense budget.
SyntheticData synthetic_lognormal(const SyntheticSpec& spec,
                                  std::size_t budget = io::kDefaultDenseBudget);

enum class MatrixFormat { csv_dense, matrix_market };

MatrixFormat parse_matrix_format(std::string_view s);
std::string_view to_string(MatrixFormat f) noexcept;

/// Throws ParseError, NegativeData, DimOverflow, IoError.
DenseMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format,
                        std::size_t budget = io::kDefaultDenseBudget);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& x, MatrixFormat format);

}  // namespace sketchnmf
