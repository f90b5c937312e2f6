#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sketchnmf/matrix.hpp"

namespace sketchnmf::io {

namespace fs = std::filesystem;

/// Entry budget for densified inputs (2^27 doubles = 1 GiB).
inline constexpr std::size_t kDefaultDenseBudget = std::size_t{1} << 27;

/// Process-wide record of every file opened for reading through this module.
/// Used to prove that a solver run never touched the full data file.
class FileAccessLog {
 public:
  static void record(const fs::path& path);
  static std::vector<fs::path> snapshot();
  static void clear();
  static bool contains(const fs::path& path);
};

/// Comma-separated rows, no header, one matrix row per line. Values are
/// written in shortest round-trip form.
void write_matrix_csv(const fs::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_csv(const fs::path& path, std::size_t budget = kDefaultDenseBudget);

/// Single-column CSV.
void write_vector_csv(const fs::path& path, const Vector& v);
Vector read_vector_csv(const fs::path& path);

/// "%%MatrixMarket matrix coordinate real general", 1-based, densified on read.
void write_matrix_market(const fs::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_market(const fs::path& path, std::size_t budget = kDefaultDenseBudget);

nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& doc);

std::string format_double(double v);

}  // namespace sketchnmf::io
