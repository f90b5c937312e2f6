#include "sketchnmf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "assembly.hpp"
#include "sketchnmf/errors.hpp"
#include "sketchnmf/rng.hpp"

namespace sketchnmf {

std::string_view to_string(Method m) noexcept { return m == Method::mu ? "mu" : "pgd"; }

std::string_view to_string(StopReason s) noexcept {
  switch (s) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::tol_reached: return "tol_reached";
    case StopReason::target_reached: return "target_reached";
    case StopReason::diverged: return "diverged";
  }
  return "unknown";
}

Method parse_method(std::string_view s) {
  if (s == "mu") return Method::mu;
  if (s == "pgd") return Method::pgd;
  throw ConfigError("unknown solver method '" + std::string(s) + "'");
}

namespace {

void check_factors(const SketchedMUProblem& p, const FactorPair& f) {
  if (f.u.rows() != p.m || f.v.rows() != p.n || f.u.cols() != f.v.cols()) {
    throw DimMismatch("factors do not match the problem");
  }
}

// f(i, c) *= num / (den + guard), where guard scales with the mean denominator.
// Each row's den and num depend only on that row of F, so the update is in place.
void multiplicative_block(const SketchedMUProblem& p, Side side, DenseMatrix& f,
                          const DenseMatrix& o, double denom_guard) {
  const detail::Assembly a(p, side, f, o);
  const std::size_t rows = f.rows(), r = f.cols();
  const double mean = a.den_total() / static_cast<double>(rows * r);
  const double guard = mean > 0.0 ? denom_guard * mean : denom_guard;

  std::vector<double> den(r), num(r);
  for (std::size_t i = 0; i < rows; ++i) {
    a.den_row(i, den);
    a.num_row(i, num);
    auto fi = f.row(i);
    for (std::size_t c = 0; c < r; ++c) {
      const double v = fi[c] * num[c] / (den[c] + guard);
      if (!std::isfinite(v)) throw NonFiniteUpdate("multiplicative update produced a non-finite entry");
      fi[c] = v;
    }
  }
}

void gradient_block(const detail::Assembly& a, const DenseMatrix& f, DenseMatrix& out,
                    double alpha) {
  const std::size_t r = f.cols();
  std::vector<double> den(r), num(r);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    a.den_row(i, den);
    a.num_row(i, num);
    auto fi = f.row(i);
    auto oi = out.row(i);
    for (std::size_t c = 0; c < r; ++c) {
      const double v = fi[c] - alpha * (den[c] - num[c]);
      if (!std::isfinite(v)) throw NonFiniteUpdate("gradient step produced a non-finite entry");
      oi[c] = v > 0.0 ? v : 0.0;
    }
  }
}

}  // namespace

void mu_step_inplace(const SketchedMUProblem& p, FactorPair& f, double denom_guard) {
  if (!p.validity.certified()) {
    throw UncertifiedProblem("multiplicative updates need a certified problem");
  }
  check_factors(p, f);
  multiplicative_block(p, Side::left, f.u, f.v, denom_guard);
  multiplicative_block(p, Side::right, f.v, f.u, denom_guard);
}

FactorPair mu_step(const SketchedMUProblem& p, const FactorPair& f, double denom_guard) {
  FactorPair out = f;
  mu_step_inplace(p, out, denom_guard);
  return out;
}

FactorPair pgd_step(const SketchedMUProblem& p, const FactorPair& f, double alpha) {
  if (!(alpha > 0.0)) throw InvalidDim("step size must be positive");
  check_factors(p, f);
  const detail::Assembly au(p, Side::left, f.u, f.v);
  const detail::Assembly av(p, Side::right, f.v, f.u);
  FactorPair out{DenseMatrix(f.u.rows(), f.u.cols()), DenseMatrix(f.v.rows(), f.v.cols())};
  gradient_block(au, f.u, out.u, alpha);
  gradient_block(av, f.v, out.v, alpha);
  return out;
}

FactorPair init_factors(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed,
                        double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidDim("init scale must be positive");
  auto fill = [&](DenseMatrix& x, std::uint64_t stream) {
    CounterRng rng(seed, stream);
    for (double& v : x.data()) v = scale * (1e-2 + (1.0 - 1e-2) * rng.uniform());
  };
  FactorPair f{DenseMatrix(m, r), DenseMatrix(n, r)};
  fill(f.u, 4);
  fill(f.v, 5);
  return f;
}

SolveResult solve(const SketchedMUProblem& p, FactorPair f0, const SolverConfig& config,
                  Method method, const Checkpoint& checkpoint) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (config.rel_tol < 0.0) throw ConfigError("rel_tol must be nonnegative");
  if (!(config.denom_guard > 0.0)) throw ConfigError("denom_guard must be positive");
  if (method == Method::mu && !p.validity.certified()) {
    throw UncertifiedProblem("multiplicative updates need a certified problem");
  }
  check_factors(p, f0);

  const std::size_t stride =
      config.log_every > 0 ? config.log_every : (config.max_iters < 10000 ? 1 : 100);
  const auto start = std::chrono::steady_clock::now();

  SolveResult result{std::move(f0), {}, {}, StopReason::max_iters, 0};
  for (const GramTerm& t : p.terms) result.term_names.push_back(t.name);

  auto record = [&](std::size_t iter) -> const TracePoint& {
    const ObjectiveValue v = problem_objective(p, result.factors);
    TracePoint pt{iter, v.total, {}, 0.0};
    for (const auto& name : result.term_names) pt.terms.push_back(v.terms.at(name));
    pt.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back(std::move(pt));
    return result.trace.back();
  };
  // Repeated term names sum into one entry; keep each name once.
  {
    std::vector<std::string> unique;
    for (const auto& n : result.term_names)
      if (std::find(unique.begin(), unique.end(), n) == unique.end()) unique.push_back(n);
    result.term_names = std::move(unique);
  }

  const double initial = record(0).objective;
  if (!std::isfinite(initial)) {
    result.stop_reason = StopReason::diverged;
    return result;
  }
  if (config.target_objective && initial <= *config.target_objective) {
    result.stop_reason = StopReason::target_reached;
    return result;
  }
  // Blow-up is measured against the larger of the start and the zero-factor
  // objective, so a start at an exact fit does not flag round-off as divergence.
  const double blowup = 1e6 * std::max(initial, zero_factor_objective(p));

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    try {
      if (method == Method::mu) {
        mu_step_inplace(p, result.factors, config.denom_guard);
      } else {
        result.factors = pgd_step(p, result.factors, config.step_alpha);
      }
    } catch (const NonFiniteUpdate&) {
      result.iterations = it;
      result.stop_reason = StopReason::diverged;
      return result;
    }
    result.iterations = it;

    const bool hit_checkpoint =
        checkpoint.fn && checkpoint.every > 0 && it % checkpoint.every == 0 &&
        checkpoint.fn(it, result.factors);
    const bool last = it == config.max_iters;
    if (!(it % stride == 0 || last || hit_checkpoint)) continue;

    const double obj = record(it).objective;
    if (!std::isfinite(obj) || (blowup > 0.0 && obj > blowup)) {
      result.stop_reason = StopReason::diverged;
      return result;
    }
    if (hit_checkpoint || (config.target_objective && obj <= *config.target_objective)) {
      result.stop_reason = StopReason::target_reached;
      return result;
    }
    const std::size_t n = result.trace.size();
    if (config.rel_tol > 0.0 && config.window > 0 && n > config.window) {
      const double old = result.trace[n - 1 - config.window].objective;
      if (old - obj <= config.rel_tol * old) {
        result.stop_reason = StopReason::tol_reached;
        return result;
      }
    }
  }
  return result;
}

}  // namespace sketchnmf
