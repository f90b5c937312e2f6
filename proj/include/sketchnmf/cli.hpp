#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sketchnmf/datagen.hpp"
#include "sketchnmf/sketching.hpp"
#include "sketchnmf/solver.hpp"

namespace sketchnmf::cli {

namespace fs = std::filesystem;

enum class ProblemShape { one_sided_orthogonal, one_sided_ridge, two_sided };

std::string_view to_string(ProblemShape p) noexcept;

struct FileSource {
  fs::path path;
  MatrixFormat format = MatrixFormat::csv_dense;
};

struct SketchSettings {
  SketchKind kind = SketchKind::gaussian_iid;
  bool two_sided = false;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::optional<double> variance;
};

struct ParamSettings {
  std::optional<double> lambda;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<double> sigma;
  std::optional<double> sigma1;
  std::optional<double> sigma2;
  ShiftConvention sigma_convention = ShiftConvention::gram;
};

struct BenchSettings {
  std::vector<std::size_t> k_grid;
  std::vector<double> lambda_grid;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentConfig {
  std::variant<SyntheticSpec, FileSource> data;
  SketchSettings sketch;
  ProblemShape problem = ProblemShape::one_sided_ridge;
  ParamSettings params;
  Method method = Method::mu;
  std::size_t rank = 0;
  SolverConfig solver;
  bool with_full_eval = false;
  fs::path output_dir = "run";
  BenchSettings bench;
  /// The document the config was parsed from, echoed into run manifests.
  nlohmann::json source;
};

/// Throws ConfigError on unknown fields, wrong types, or incompatible choices.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const fs::path& path);

/// Where the full data matrix lives for this config.
fs::path data_path(const ExperimentConfig& cfg);

void cmd_generate(const ExperimentConfig& cfg);
void cmd_compress(const ExperimentConfig& cfg);
/// Returns the solver stop reason; outputs are written either way.
StopReason cmd_factorize(const ExperimentConfig& cfg);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_bench(const ExperimentConfig& cfg);

/// Parses arguments, runs one subcommand and maps errors to exit codes:
/// 0 success, 2 config, 3 diverged, 4 I/O.
int run(int argc, const char* const* argv);

}  // namespace sketchnmf::cli
