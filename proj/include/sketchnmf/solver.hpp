#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sketchnmf/objectives.hpp"
#include "sketchnmf/problem.hpp"

namespace sketchnmf {

enum class Method { mu, pgd };
enum class StopReason { max_iters, tol_reached, target_reached, diverged };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(StopReason s) noexcept;
Method parse_method(std::string_view s);

struct SolverConfig {
  std::size_t max_iters = 1000;
  /// Stop when the objective dropped by at most rel_tol (relative) over the
  /// last `window` logged points. Zero disables the test.
  double rel_tol = 0.0;
  std::size_t window = 10;
  std::optional<double> target_objective;
  double step_alpha = 1e-3;
  double denom_guard = 1e-12;
  std::uint64_t seed = 0;
  /// Logging stride; 0 logs every iteration below 10000 iterations and every
  /// 100th above.
  std::size_t log_every = 0;
};

struct TracePoint {
  std::size_t iter = 0;
  double objective = 0.0;
  std::vector<double> terms;
  double wall_ms = 0.0;
};

struct SolveResult {
  FactorPair factors;
  std::vector<TracePoint> trace;
  std::vector<std::string> term_names;
  StopReason stop_reason = StopReason::max_iters;
  std::size_t iterations = 0;
};

/// Called every `every` iterations with the current factors; returning true
/// stops the run with target_reached.
struct Checkpoint {
  std::function<bool(std::size_t, const FactorPair&)> fn;
  std::size_t every = 1;
};

/// One alternating multiplicative update (U first, then V against the new U).
/// Throws UncertifiedProblem, NonFiniteUpdate.
FactorPair mu_step(const SketchedMUProblem& p, const FactorPair& f, double denom_guard = 1e-12);
void mu_step_inplace(const SketchedMUProblem& p, FactorPair& f, double denom_guard = 1e-12);

/// Simultaneous projected gradient step on the 1/2-scaled objective.
FactorPair pgd_step(const SketchedMUProblem& p, const FactorPair& f, double alpha);

/// Entries i.i.d. uniform on (scale/100, scale].
FactorPair init_factors(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed,
                        double scale);

SolveResult solve(const SketchedMUProblem& p, FactorPair f0, const SolverConfig& config,
                  Method method, const Checkpoint& checkpoint = {});

}  // namespace sketchnmf
