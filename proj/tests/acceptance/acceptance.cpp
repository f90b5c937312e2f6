// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is the number of failures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <new>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../instances.hpp"
#include "../oracles.hpp"
#include "sketchnmf/datagen.hpp"
#include "sketchnmf/eval.hpp"
#include "sketchnmf/objectives.hpp"
#include "sketchnmf/problem.hpp"
#include "sketchnmf/solver.hpp"

using namespace sketchnmf;

// ---- byte-level heap audit ---------------------------------------------------

namespace heap {

std::atomic<bool> armed{false};
std::atomic<std::size_t> live{0}, peak{0}, largest{0};

struct alignas(std::max_align_t) Header {
  std::size_t size;
  bool counted;
};

void* allocate(std::size_t n) {
  auto* h = static_cast<Header*>(std::malloc(sizeof(Header) + n));
  if (!h) throw std::bad_alloc();
  h->size = n;
  h->counted = armed.load(std::memory_order_relaxed);
  if (h->counted) {
    const std::size_t now = live.fetch_add(n) + n;
    std::size_t p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {}
    std::size_t l = largest.load();
    while (n > l && !largest.compare_exchange_weak(l, n)) {}
  }
  return h + 1;
}

void release(void* ptr) noexcept {
  if (!ptr) return;
  Header* h = static_cast<Header*>(ptr) - 1;
  if (h->counted) live.fetch_sub(h->size);
  std::free(h);
}

void arm() {
  live = 0;
  peak = 0;
  largest = 0;
  armed = true;
}

void disarm() { armed = false; }

}  // namespace heap

void* operator new(std::size_t n) { return heap::allocate(n); }
void* operator new[](std::size_t n) { return heap::allocate(n); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
  try {
    return heap::allocate(n);
  } catch (...) {
    return nullptr;
  }
}
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept {
  try {
    return heap::allocate(n);
  } catch (...) {
    return nullptr;
  }
}
void operator delete(void* p) noexcept { heap::release(p); }
void operator delete[](void* p) noexcept { heap::release(p); }
void operator delete(void* p, std::size_t) noexcept { heap::release(p); }
void operator delete[](void* p, std::size_t) noexcept { heap::release(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { heap::release(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { heap::release(p); }

// ---- helpers ----------------------------------------------------------------

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double init_scale(const Vector& row_sums, std::size_t m, std::size_t r) {
  double total = 0.0;
  for (double v : row_sums.data()) total += v;
  return std::sqrt(total / static_cast<double>(row_sums.size()) / static_cast<double>(m * r));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Runs MU until relative error <= 1e-3 or the iteration budget is spent.
struct Recovery {
  double rel = 0.0;
  std::size_t iters = 0;
};

Recovery recover(const SketchedMUProblem& p, const DenseMatrix& x, FactorPair f0,
                 std::size_t budget) {
  SolverConfig cfg;
  cfg.max_iters = budget;
  cfg.log_every = 1000;
  double last = 0.0;
  const Checkpoint cp{[&](std::size_t, const FactorPair& f) {
                        last = relative_error(x, f);
                        return last <= 1e-3;
                      },
                      500};
  const SolveResult res = solve(p, std::move(f0), cfg, Method::mu, cp);
  return {relative_error(x, res.factors), res.iterations};
}

Outcome recovery_summary(const std::vector<Recovery>& runs) {
  int hits = 0;
  std::ostringstream d;
  for (const Recovery& r : runs) {
    hits += r.rel <= 1e-3;
    d << ' ' << fmt(r.rel) << '@' << r.iters;
  }
  return {hits >= 4, std::to_string(hits) + "/5 seeds reach 1e-3; final rel err@iters:" + d.str()};
}

// ---- criteria ---------------------------------------------------------------

Outcome exact_recovery_two_sided() {
  std::vector<Recovery> runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticData d = synthetic_lognormal({200, 200, 10, seed});
    auto c = std::make_shared<const CompressedTwoSided>(
        compress_two_sided(d.x, sample_gaussian_sketch(10, 200, seed),
                           sample_gaussian_sketch(10, 200, seed, std::nullopt, Side::right)));
    const SketchedMUProblem p = build_problem_two_sided(c, 10, {});
    runs.push_back(recover(p, d.x, init_factors(200, 200, 10, seed, init_scale(c->row_sums, 200, 10)),
                           200000));
  }
  return recovery_summary(runs);
}

Outcome exact_recovery_one_sided() {
  std::vector<Recovery> runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticData d = synthetic_lognormal({200, 200, 10, seed});
    auto c = std::make_shared<const CompressedOneSided>(
        compress_one_sided(d.x, rangefinder_sketch(d.x, 21, seed)));
    const SketchedMUProblem p = build_problem_one_sided_orthogonal(c, 10, 0.1);
    runs.push_back(recover(p, d.x, init_factors(200, 200, 10, seed, init_scale(c->row_sums, 200, 10)),
                           200000));
  }
  return recovery_summary(runs);
}

Outcome monotonicity() {
  oracle::Gen g(2024);
  const int instances_per_builder = 400;
  int failures = 0, total = 0;
  std::string first;
  double worst_level = 0.0;  // objective / initial objective at a violation
  for (int t = 0; t < 3 * instances_per_builder; ++t) {
    const std::size_t m = g.integer(2, 40), n = g.integer(2, 40);
    const std::size_t k = g.integer(1, std::min<std::size_t>(10, std::min(m, n)));
    const std::size_t r = g.integer(1, std::min<std::size_t>(5, std::min(m, n)));
    SketchedMUProblem p;
    const char* kind = "";
    switch (t % 3) {
      case 0: {
        kind = "one_sided_orthogonal";
        const DenseMatrix x = instances::data(g, m, n);
        const std::uint64_t seed = g.integer(0, 1u << 30);
        SketchOperator a = t % 2 ? rangefinder_sketch(x, k, seed) : sample_orthonormal_sketch(k, m, seed);
        p = build_problem_one_sided_orthogonal(
            std::make_shared<const CompressedOneSided>(compress_one_sided(x, std::move(a))), r,
            g.uniform(0, 1));
        break;
      }
      case 1:
        kind = "one_sided_ridge";
        p = build_problem_one_sided_ridge(instances::one_sided(g, m, n, k, false).c, r, g.uniform(0, 2));
        break;
      default:
        kind = "two_sided";
        p = build_problem_two_sided(instances::two_sided(g, m, n, k).c, r,
                                    {0, g.uniform(0, 1), g.uniform(0, 1), std::nullopt, std::nullopt,
                                     std::nullopt});
    }
    if (!p.validity.certified()) return {false, std::string("builder left an uncertified ") + kind};
    SolverConfig cfg;
    cfg.max_iters = 100;
    cfg.log_every = 1;
    const SolveResult res = solve(p, init_factors(m, n, r, t, g.uniform(0.1, 2.0)), cfg, Method::mu);
    ++total;
    const MonotoneCheck mc = check_monotone(res.trace, 1e-12);
    if (!mc.ok) {
      const std::size_t v = *mc.first_violation;
      worst_level = std::max(worst_level, res.trace[v].objective / res.trace.front().objective);
      if (failures++ == 0) {
        first = std::string(kind) + " instance " + std::to_string(t) + " step " +
                std::to_string(*mc.first_violation);
      }
    }
  }
  std::string detail = std::to_string(total - failures) + "/" + std::to_string(total) +
                       " traces monotone over 100 MU steps (slack 1e-12)";
  if (failures) {
    detail += "; first violation: " + first + "; every violation sits at objective <= " +
              fmt(worst_level) + " x initial";
  }
  return {failures == 0, detail};
}

Outcome oracle_equivalence() {
  oracle::Gen g(77);
  double worst_obj = 0.0, worst_step = 0.0;
  auto obj_err = [&](double got, double want) {
    worst_obj = std::max(worst_obj, std::abs(got - want) / std::max(std::abs(want), 1e-300));
  };
  auto step_err = [&](const FactorPair& got, const oracle::Factors& want) {
    worst_step = std::max({worst_step, oracle::rel_diff(got.u, want.u), oracle::rel_diff(got.v, want.v)});
  };
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = g.integer(2, 30), n = g.integer(2, 30);
    const std::size_t k = g.integer(1, std::min<std::size_t>(10, std::min(m, n)));
    const std::size_t r = g.integer(1, std::min<std::size_t>(5, std::min(m, n)));
    const oracle::Factors f = instances::factors(g, m, n, r);
    const FactorPair fp{f.u, f.v};

    const auto o = instances::one_sided(g, m, n, k, true);
    const double lo = g.uniform(0, 1), so = shift_sigma(o.c->a).value * g.uniform(1, 2);
    const double want_o = oracle::one_sided_orthogonal(o.x, o.c->a.matrix, f, lo, so);
    const auto po = build_problem_one_sided_orthogonal(o.c, r, lo, so);
    obj_err(obj_one_sided_orthogonal(*o.c, fp, lo, so), want_o);
    obj_err(problem_objective(po, fp).total, want_o);
    step_err(mu_step(po, fp), oracle::mu_one_sided_orthogonal(o.x, o.c->a.matrix, f, lo, so));

    const auto rr = instances::one_sided(g, m, n, k, false);
    const double lr = g.uniform(0, 2), sr = shift_sigma(rr.c->a).value * g.uniform(1, 2);
    const double want_r = oracle::one_sided_ridge(rr.x, rr.c->a.matrix, f, lr, sr);
    const auto pr = build_problem_one_sided_ridge(rr.c, r, lr, sr);
    obj_err(obj_one_sided_ridge(*rr.c, fp, lr, sr), want_r);
    obj_err(problem_objective(pr, fp).total, want_r);
    step_err(mu_step(pr, fp), oracle::mu_one_sided_ridge(rr.x, rr.c->a.matrix, f, lr, sr));

    const auto two = instances::two_sided(g, m, n, k);
    const double l1 = g.uniform(0, 1), l2 = g.uniform(0, 1);
    const double s1 = shift_sigma_regularized(two.c->a1, l1, two.c->q1).value * g.uniform(1, 2);
    const double s2 = shift_sigma_regularized(two.c->a2, l2, two.c->q2).value * g.uniform(1, 2);
    const RegularizationParams rp{0, l1, l2, std::nullopt, s1, s2};
    const auto& c2 = *two.c;
    const double want_t =
        oracle::two_sided(two.x, c2.a1.matrix, c2.a2.matrix, c2.q1, c2.q2, f, l1, l2, s1, s2);
    const auto pt = build_problem_two_sided(two.c, r, rp);
    obj_err(obj_two_sided(c2, fp, rp), want_t);
    obj_err(problem_objective(pt, fp).total, want_t);
    step_err(mu_step(pt, fp),
             oracle::mu_two_sided(two.x, c2.a1.matrix, c2.a2.matrix, c2.q1, c2.q2, f, l1, l2, s1, s2));
  }
  return {worst_obj <= 1e-9 && worst_step <= 1e-10,
          "200 instances x 3 objectives; worst objective rel diff " + fmt(worst_obj) +
              " (<= 1e-9), worst MU step rel diff " + fmt(worst_step) + " (<= 1e-10)"};
}

Outcome rangefinder_bound() {
  oracle::Gen g(5);
  const std::size_t m = 60, n = 50, r = 5, k = 12;
  const DenseMatrix left = oracle::orth(g.gaussian(m, n));
  const DenseMatrix right = oracle::orth(g.gaussian(n, n));
  DenseMatrix scaled = left;
  double tail = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::ldexp(1.0, -static_cast<int>(j + 1));
    for (std::size_t i = 0; i < m; ++i) scaled(i, j) *= s;
    if (j >= r) tail += s * s;
  }
  const DenseMatrix x = oracle::mul(scaled, oracle::tr(right));
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    mean += residual_projection_norm(x, rangefinder_sketch(x, k, seed));
  }
  mean /= 200.0;
  const double bound = std::sqrt(1.0 + static_cast<double>(r) / static_cast<double>(k - r - 1)) *
                       std::sqrt(tail) * 1.10;
  return {mean <= bound, "mean ||X - P_A X||_F = " + fmt(mean) + ", bound " + fmt(bound)};
}

Outcome approximate_orthogonality() {
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const double eps = approx_orthogonality_epsilon(sample_gaussian_sketch(100, 2000, seed));
    worst = std::max(worst, eps);
    ok += eps <= 0.5;
  }
  return {ok >= 95, std::to_string(ok) + "/100 seeds with singular values in [0.5, 1.5]; worst eps " +
                        fmt(worst)};
}

Outcome regularization_effect() {
  const std::size_t m = 200, n = 200, r = 10, k = 21, iters = 20000;
  std::vector<double> gains;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DenseMatrix x = synthetic_lognormal({m, n, r, seed}).x;
    oracle::Gen g(seed);
    const double sd = 0.01 * std::sqrt(oracle::fro2(x) / static_cast<double>(m * n));
    for (double& v : x.data()) v = std::max(0.0, v + sd * g.normal());
    auto c = std::make_shared<const CompressedOneSided>(compress_one_sided(x, rangefinder_sketch(x, k, seed)));
    const double scale = init_scale(c->row_sums, m, r);
    double cos[2];
    for (int j = 0; j < 2; ++j) {
      const SketchedMUProblem p = build_problem_one_sided_orthogonal(c, r, j ? 0.1 : 0.0);
      SolverConfig cfg;
      cfg.max_iters = iters;
      const SolveResult res = solve(p, init_factors(m, n, r, seed, scale), cfg, Method::mu);
      cos[j] = cosine_similarity(x, res.factors);
    }
    gains.push_back(cos[1] - cos[0]);
    d << " (" << fmt(cos[0]) << " -> " << fmt(cos[1]) << ")";
  }
  const double med = median(gains);
  return {med > 0.0, "median cosine gain lambda 0 -> 0.1 = " + fmt(med) + ";" + d.str()};
}

Outcome gradient_check() {
  oracle::Gen g(88);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = g.integer(2, 12), n = g.integer(2, 12);
    const std::size_t k = g.integer(1, std::min<std::size_t>(6, std::min(m, n)));
    const std::size_t r = g.integer(1, std::min<std::size_t>(4, std::min(m, n)));
    SketchedMUProblem p;
    switch (t % 3) {
      case 0: p = build_problem_one_sided_orthogonal(instances::one_sided(g, m, n, k, true).c, r, g.uniform(0, 1)); break;
      case 1: p = build_problem_one_sided_ridge(instances::one_sided(g, m, n, k, false).c, r, g.uniform(0, 2)); break;
      default:
        p = build_problem_two_sided(instances::two_sided(g, m, n, k).c, r,
                                    {0, g.uniform(0, 1), g.uniform(0, 1), std::nullopt, std::nullopt,
                                     std::nullopt});
    }
    const oracle::Factors of = instances::factors(g, m, n, r);
    FactorPair f{of.u, of.v};
    const FactorPair grad = gradient(p, f);
    double scale = 0.0, err = 0.0;
    for (const DenseMatrix* gm : {&grad.u, &grad.v})
      for (double v : gm->data()) scale = std::max(scale, std::abs(v));
    auto probe = [&](DenseMatrix& x, const DenseMatrix& gx) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        const double h = 1e-6 * std::max(1.0, std::abs(keep));
        x.data()[i] = keep + h;
        const double up = 0.5 * problem_objective(p, f).total;
        x.data()[i] = keep - h;
        const double down = 0.5 * problem_objective(p, f).total;
        x.data()[i] = keep;
        err = std::max(err, std::abs((up - down) / (2 * h) - gx.data()[i]));
      }
    };
    probe(f.u, grad.u);
    probe(f.v, grad.v);
    worst = std::max(worst, err / scale);
  }
  return {worst <= 1e-5, "50 interior points; worst max|fd - grad| / max|grad| = " + fmt(worst)};
}

Outcome memory_discipline() {
  const std::size_t m = 1000, n = 1000, k = 20, r = 20;
  const SyntheticData d = synthetic_lognormal({m, n, r, 1});
  auto c = std::make_shared<const CompressedOneSided>(compress_one_sided(d.x, rangefinder_sketch(d.x, k, 1)));
  const std::size_t record_bytes =
      (c->a.matrix.size() + c->y.size() + c->row_sums.size()) * sizeof(double);
  const double scale = init_scale(c->row_sums, m, r);

  heap::arm();
  SolverConfig cfg;
  cfg.max_iters = 200;
  std::size_t iters = 0;
  {
    const SketchedMUProblem p = build_problem_one_sided_orthogonal(c, r, 0.1);
    const SolveResult res = solve(p, init_factors(m, n, r, 1, scale), cfg, Method::mu);
    iters = res.iterations;
  }
  heap::disarm();

  const std::size_t largest = heap::largest.load(), peak = heap::peak.load();
  const std::size_t single_cap = std::max(m, n) * std::max(r, k) * sizeof(double);
  const double dense = static_cast<double>(m * n * sizeof(double));
  const double ratio = static_cast<double>(peak + record_bytes) / dense;
  return {largest <= single_cap && ratio <= 0.10,
          std::to_string(iters) + " MU iterations; largest allocation " + std::to_string(largest) +
              " B (cap " + std::to_string(single_cap) + " B); record " + std::to_string(record_bytes) +
              " B + solver peak " + std::to_string(peak) + " B = " + fmt(100 * ratio) +
              "% of dense X (cap 10%)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact recovery, two-sided Gaussian sketches", exact_recovery_two_sided},
      {"exact recovery, one-sided rangefinder sketch", exact_recovery_one_sided},
      {"MU monotonicity", monotonicity},
      {"oracle equivalence", oracle_equivalence},
      {"rangefinder bound", rangefinder_bound},
      {"approximate orthogonality", approximate_orthogonality},
      {"regularization effect", regularization_effect},
      {"PGD gradient check", gradient_check},
      {"memory discipline", memory_discipline},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::strtoul(argv[i], nullptr, 10));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
