#include "sketchnmf/problem.hpp"

#include <algorithm>
#include <cmath>

#include "assembly.hpp"
#include "sketchnmf/errors.hpp"

namespace sketchnmf {

namespace {

std::size_t own_dim(const SketchedMUProblem& p, Side side) { return side == Side::left ? p.m : p.n; }
std::size_t free_dim(const SketchedMUProblem& p, Side side) { return side == Side::left ? p.n : p.m; }

void require(bool ok, const std::string& what) {
  if (!ok) throw DimMismatch(what);
}

// Checks sigma against the certified minimum. Returns whether it passed.
bool check_sigma(double given, double required, const char* side, bool strict) {
  const double slack = 1e-12 * std::max(1.0, required);
  if (given >= required - slack) return true;
  if (strict) throw InsufficientSigma(side, given, required);
  return false;
}

void require_rank(std::size_t r, std::size_t m, std::size_t n) {
  if (r == 0 || r > std::min(m, n)) throw InvalidDim("rank must satisfy 1 <= r <= min(m, n)");
}

template <class Record, class Member>
std::shared_ptr<const Member> alias(const std::shared_ptr<const Record>& c, const Member& member) {
  return std::shared_ptr<const Member>(c, &member);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// k x r: sum_i view(i, p) x(i, :)
std::vector<double> project(const OperandView& view, const DenseMatrix& x) {
  const std::size_t k = view.k(), r = x.cols();
  std::vector<double> out(k * r, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double w = view(i, p);
      for (std::size_t c = 0; c < r; ++c) out[p * r + c] += w * x(i, c);
    }
  return out;
}

// Tr(A^T A B^T B) for row-major a (rows x r) given as rows, b gram r x r.
double weighted_trace(const std::vector<double>& gram_b, std::span<const double> row, std::size_t r) {
  double s = 0.0;
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) s += row[a] * row[b] * gram_b[a * r + b];
  return s;
}

std::vector<double> gram_of(const DenseMatrix& x) {
  const std::size_t r = x.cols();
  std::vector<double> g(r * r, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b) g[a * r + b] += xi[a] * xi[b];
  }
  return g;
}

double term_value(const GramTerm& t, const DenseMatrix& f, const DenseMatrix& o) {
  const std::size_t r = f.cols();
  return std::visit(
      [&](const auto& form) -> double {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, ExplicitSketch>) {
          // ||T - (S^T F) O^T||^2, residual formed entry by entry
          const std::vector<double> sf = project(form.sketch, f);
          const std::size_t k = form.sketch.k();
          double s = 0.0;
          for (std::size_t j = 0; j < o.rows(); ++j) {
            auto oj = o.row(j);
            for (std::size_t p = 0; p < k; ++p) {
              const double d = form.target(j, p) - dot({sf.data() + p * r, r}, oj);
              s += d * d;
            }
          }
          return s;
        } else if constexpr (std::is_same_v<T, RankOneShift>) {
          if (form.sigma == 0.0) return 0.0;
          std::vector<double> a(r, 0.0);
          for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t c = 0; c < r; ++c) a[c] += f(i, c);
          double s = 0.0;
          for (std::size_t j = 0; j < o.rows(); ++j) {
            const double d = (*form.sums)[j] - dot(a, o.row(j));
            s += d * d;
          }
          return form.sigma * s;
        } else if constexpr (std::is_same_v<T, ProjectorComplement>) {
          if (form.lambda == 0.0) return 0.0;
          const std::vector<double> qf = project(form.basis, f);
          const std::vector<double> go = gram_of(o);
          const std::size_t k = form.basis.k();
          std::vector<double> ri(r);
          double s = 0.0;
          for (std::size_t i = 0; i < f.rows(); ++i) {
            for (std::size_t c = 0; c < r; ++c) ri[c] = f(i, c);
            for (std::size_t p = 0; p < k; ++p) {
              const double w = form.basis(i, p);
              for (std::size_t c = 0; c < r; ++c) ri[c] -= w * qf[p * r + c];
            }
            s += weighted_trace(go, ri, r);
          }
          return form.lambda * std::max(s, 0.0);
        } else {
          if (form.lambda == 0.0) return 0.0;
          const std::vector<double> go = gram_of(o);
          double s = 0.0;
          for (std::size_t i = 0; i < f.rows(); ++i) s += weighted_trace(go, f.row(i), r);
          return form.lambda * s;
        }
      },
      t.form);
}

}  // namespace

void validate(const SketchedMUProblem& p) {
  if (p.m == 0 || p.n == 0 || p.r == 0) throw InvalidDim("problem dimensions must be positive");
  for (const GramTerm& t : p.terms) {
    const std::size_t own = own_dim(p, t.side), other = free_dim(p, t.side);
    std::visit(
        [&](const auto& form) {
          using T = std::decay_t<decltype(form)>;
          if constexpr (std::is_same_v<T, ExplicitSketch>) {
            require(form.sketch.dim() == own, "term '" + t.name + "': sketch dimension");
            require(form.target.dim() == other, "term '" + t.name + "': target dimension");
            require(form.sketch.k() == form.target.k(), "term '" + t.name + "': sketch size");
          } else if constexpr (std::is_same_v<T, RankOneShift>) {
            require(form.sums && form.sums->size() == other, "term '" + t.name + "': sum length");
            if (form.sigma < 0.0) throw InvalidDim("negative shift in term '" + t.name + "'");
          } else if constexpr (std::is_same_v<T, ProjectorComplement>) {
            require(form.basis.dim() == own, "term '" + t.name + "': basis dimension");
            if (form.lambda < 0.0) throw LambdaOutOfRange("negative weight in term '" + t.name + "'");
          } else {
            if (form.lambda < 0.0) throw LambdaOutOfRange("negative weight in term '" + t.name + "'");
          }
        },
        t.form);
  }
}

SketchedMUProblem build_problem_one_sided_orthogonal(std::shared_ptr<const CompressedOneSided> c,
                                                     std::size_t r, double lambda,
                                                     std::optional<double> sigma, bool strict) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw LambdaOutOfRange("lambda must lie in [0, 1]");
  require_rank(r, c->m, c->n);
  if (orthonormality_defect(c->a) > 1e-8) {
    throw InvalidDim("sketch rows are not orthonormal");
  }
  const double required = shift_sigma(c->a).value;
  const double s = sigma.value_or(required);
  const bool ok = check_sigma(s, required, "left", strict);

  auto a = alias(c, c->a.matrix);
  SketchedMUProblem p{c->m, c->n, r, {}, {}};
  p.terms.push_back({Side::left, "residual",
                     ExplicitSketch{OperandView{a, false}, OperandView{alias(c, c->y), false}}});
  // With orthonormal rows, A^T A + lambda (I - A^T A) = (1 - lambda) A^T A + lambda I.
  p.terms.push_back({Side::left, "regularizer", ProjectorComplement{lambda, OperandView{a, false}}});
  p.terms.push_back({Side::left, "shift", RankOneShift{s, alias(c, c->row_sums)}});
  p.validity = {ok, ok};
  validate(p);
  return p;
}

SketchedMUProblem build_problem_one_sided_ridge(std::shared_ptr<const CompressedOneSided> c,
                                                std::size_t r, double lambda,
                                                std::optional<double> sigma, bool strict) {
  if (!(lambda >= 0.0)) throw LambdaOutOfRange("lambda must be nonnegative");
  require_rank(r, c->m, c->n);
  const double required = shift_sigma(c->a).value;
  const double s = sigma.value_or(required);
  const bool ok = check_sigma(s, required, "left", strict);

  SketchedMUProblem p{c->m, c->n, r, {}, {}};
  p.terms.push_back({Side::left, "residual",
                     ExplicitSketch{OperandView{alias(c, c->a.matrix), false},
                                    OperandView{alias(c, c->y), false}}});
  p.terms.push_back({Side::left, "shift", RankOneShift{s, alias(c, c->row_sums)}});
  p.terms.push_back({Side::left, "regularizer", ScaledIdentity{lambda}});
  p.validity = {ok, ok};
  validate(p);
  return p;
}

SketchedMUProblem build_problem_two_sided(std::shared_ptr<const CompressedTwoSided> c,
                                          std::size_t r, const RegularizationParams& params,
                                          bool strict) {
  if (!(params.lambda1 >= 0.0) || !(params.lambda2 >= 0.0)) {
    throw LambdaOutOfRange("lambda1 and lambda2 must be nonnegative");
  }
  require_rank(r, c->m, c->n);
  const double req1 = shift_sigma_regularized(c->a1, params.lambda1, c->q1).value;
  const double req2 = shift_sigma_regularized(c->a2, params.lambda2, c->q2).value;
  const double s1 = params.sigma1.value_or(req1);
  const double s2 = params.sigma2.value_or(req2);
  const bool ok1 = check_sigma(s1, req1, "left", strict);
  const bool ok2 = check_sigma(s2, req2, "right", strict);

  SketchedMUProblem p{c->m, c->n, r, {}, {}};
  p.terms.push_back({Side::left, "residual_left",
                     ExplicitSketch{OperandView{alias(c, c->a1.matrix), false},
                                    OperandView{alias(c, c->y1), false}}});
  p.terms.push_back({Side::left, "shift_left", RankOneShift{s1, alias(c, c->row_sums)}});
  p.terms.push_back({Side::left, "regularizer_left",
                     ProjectorComplement{params.lambda1, OperandView{alias(c, c->q1), true}}});
  p.terms.push_back({Side::right, "residual_right",
                     ExplicitSketch{OperandView{alias(c, c->a2.matrix), true},
                                    OperandView{alias(c, c->y2), true}}});
  p.terms.push_back({Side::right, "shift_right", RankOneShift{s2, alias(c, c->col_sums)}});
  p.terms.push_back({Side::right, "regularizer_right",
                     ProjectorComplement{params.lambda2, OperandView{alias(c, c->q2), true}}});
  p.validity = {ok1 && ok2, ok1 && ok2};
  validate(p);
  return p;
}

ObjectiveValue problem_objective(const SketchedMUProblem& p, const FactorPair& f) {
  if (f.u.rows() != p.m || f.v.rows() != p.n || f.u.cols() != f.v.cols()) {
    throw DimMismatch("factors do not match the problem");
  }
  ObjectiveValue v;
  for (const GramTerm& t : p.terms) {
    const double value = t.side == Side::left ? term_value(t, f.u, f.v) : term_value(t, f.v, f.u);
    v.terms[t.name] += value;
    v.total += value;
  }
  return v;
}

double zero_factor_objective(const SketchedMUProblem& p) {
  double total = 0.0;
  for (const GramTerm& t : p.terms) {
    if (const auto* e = std::get_if<ExplicitSketch>(&t.form)) {
      for (std::size_t j = 0; j < e->target.dim(); ++j)
        for (std::size_t q = 0; q < e->target.k(); ++q) total += e->target(j, q) * e->target(j, q);
    } else if (const auto* s = std::get_if<RankOneShift>(&t.form)) {
      for (double v : s->sums->data()) total += s->sigma * v * v;
    }
  }
  return total;
}

FactorPair gradient(const SketchedMUProblem& p, const FactorPair& f) {
  const detail::Assembly au(p, Side::left, f.u, f.v);
  const detail::Assembly av(p, Side::right, f.v, f.u);
  FactorPair g{DenseMatrix(f.u.rows(), f.u.cols()), DenseMatrix(f.v.rows(), f.v.cols())};
  std::vector<double> num(f.u.cols());
  auto fill = [&](const detail::Assembly& a, DenseMatrix& out) {
    for (std::size_t i = 0; i < out.rows(); ++i) {
      auto row = out.row(i);
      a.den_row(i, row);
      a.num_row(i, num);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] -= num[c];
    }
  };
  fill(au, g.u);
  fill(av, g.v);
  return g;
}

}  // namespace sketchnmf
