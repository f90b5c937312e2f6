#include "assembly.hpp"

#include "sketchnmf/errors.hpp"

namespace sketchnmf::detail {

namespace {

// k x r: sum_i view(i, p) * x(i, :)
std::vector<double> project(const OperandView& view, const DenseMatrix& x) {
  const std::size_t k = view.k(), r = x.cols();
  std::vector<double> out(k * r, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double w = view(i, p);
      if (w == 0.0) continue;
      double* o = out.data() + p * r;
      for (std::size_t c = 0; c < r; ++c) o[c] += w * xi[c];
    }
  }
  return out;
}

// r x r: X^T X
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

// (k x r) * (r x r)
std::vector<double> times(const std::vector<double>& a, const std::vector<double>& g,
                          std::size_t r) {
  const std::size_t k = a.size() / r;
  std::vector<double> out(k * r, 0.0);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t c = 0; c < r; ++c) {
      const double w = a[p * r + c];
      for (std::size_t d = 0; d < r; ++d) out[p * r + d] += w * g[c * r + d];
    }
  return out;
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& x, double s) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * x[i];
}

void check_dim(const OperandView& v, std::size_t dim, const std::string& name) {
  if (v.dim() != dim) {
    throw DimMismatch("term '" + name + "' has dimension " + std::to_string(v.dim()) +
                      ", expected " + std::to_string(dim));
  }
}

}  // namespace

Assembly::Assembly(const SketchedMUProblem& p, Side side, const DenseMatrix& f,
                   const DenseMatrix& o)
    : f_(&f), r_(f.cols()), m_(r_ * r_, 0.0), c_den_(r_, 0.0), c_num_(r_, 0.0) {
  if (o.cols() != r_) throw DimMismatch("factor ranks differ");
  std::vector<double> go;  // O^T O, computed on first use
  auto gram_o = [&]() -> const std::vector<double>& {
    if (go.empty()) go = gram_of(o);
    return go;
  };

  for (const GramTerm& t : p.terms) {
    const bool own = t.side == side;
    std::visit(
        [&](const auto& form) {
          using T = std::decay_t<decltype(form)>;
          if constexpr (std::is_same_v<T, ExplicitSketch>) {
            if (own) {
              check_dim(form.sketch, f.rows(), t.name);
              check_dim(form.target, o.rows(), t.name);
              // W = T^T O, Z = (S^T F)(O^T O)
              num_parts_.push_back({&form.sketch, project(form.target, o), 1.0});
              den_parts_.push_back({&form.sketch, times(project(form.sketch, f), gram_o(), r_), 1.0});
            } else {
              check_dim(form.sketch, o.rows(), t.name);
              check_dim(form.target, f.rows(), t.name);
              std::vector<double> so = project(form.sketch, o);
              const std::size_t k = form.sketch.k();
              for (std::size_t q = 0; q < k; ++q)
                for (std::size_t a = 0; a < r_; ++a)
                  for (std::size_t b = 0; b < r_; ++b) m_[a * r_ + b] += so[q * r_ + a] * so[q * r_ + b];
              num_parts_.push_back({&form.target, std::move(so), 1.0});
            }
          } else if constexpr (std::is_same_v<T, RankOneShift>) {
            if (form.sigma == 0.0) return;
            const Vector& s = *form.sums;
            if (own) {
              if (s.size() != o.rows()) throw DimMismatch("term '" + t.name + "' sum length");
              // sigma (s^T O) and sigma (1^T F)(O^T O)
              std::vector<double> ones_f(r_, 0.0);
              for (std::size_t i = 0; i < f.rows(); ++i)
                for (std::size_t c = 0; c < r_; ++c) ones_f[c] += f(i, c);
              for (std::size_t j = 0; j < o.rows(); ++j)
                for (std::size_t c = 0; c < r_; ++c) c_num_[c] += form.sigma * s[j] * o(j, c);
              add_scaled(c_den_, times(ones_f, gram_o(), r_), form.sigma);
            } else {
              if (s.size() != f.rows()) throw DimMismatch("term '" + t.name + "' sum length");
              std::vector<double> a(r_, 0.0);
              for (std::size_t i = 0; i < o.rows(); ++i)
                for (std::size_t c = 0; c < r_; ++c) a[c] += o(i, c);
              for (std::size_t x = 0; x < r_; ++x)
                for (std::size_t y = 0; y < r_; ++y) m_[x * r_ + y] += form.sigma * a[x] * a[y];
              for (double& v : a) v *= form.sigma;
              sum_parts_.push_back({&s, std::move(a)});
            }
          } else if constexpr (std::is_same_v<T, ProjectorComplement>) {
            if (form.lambda == 0.0) return;
            if (own) {
              check_dim(form.basis, f.rows(), t.name);
              // lambda (F - Q Q^T F)(O^T O)
              add_scaled(m_, gram_o(), form.lambda);
              den_parts_.push_back(
                  {&form.basis, times(project(form.basis, f), gram_o(), r_), -form.lambda});
            } else {
              check_dim(form.basis, o.rows(), t.name);
              // lambda R^T R with R = O - Q (Q^T O), accumulated row by row
              const std::vector<double> qo = project(form.basis, o);
              const std::size_t k = form.basis.k();
              std::vector<double> ri(r_);
              for (std::size_t i = 0; i < o.rows(); ++i) {
                for (std::size_t c = 0; c < r_; ++c) ri[c] = o(i, c);
                for (std::size_t q = 0; q < k; ++q) {
                  const double w = form.basis(i, q);
                  for (std::size_t c = 0; c < r_; ++c) ri[c] -= w * qo[q * r_ + c];
                }
                for (std::size_t a = 0; a < r_; ++a)
                  for (std::size_t b = 0; b < r_; ++b) m_[a * r_ + b] += form.lambda * ri[a] * ri[b];
              }
            }
          } else {
            if (form.lambda == 0.0) return;
            add_scaled(m_, gram_o(), form.lambda);
          }
        },
        t.form);
  }
}

void Assembly::den_row(std::size_t i, std::span<double> out) const {
  const std::size_t r = r_;
  auto fi = f_->row(i);
  for (std::size_t c = 0; c < r; ++c) out[c] = c_den_[c];
  for (std::size_t a = 0; a < r; ++a) {
    const double w = fi[a];
    if (w == 0.0) continue;
    const double* row = m_.data() + a * r;
    for (std::size_t c = 0; c < r; ++c) out[c] += w * row[c];
  }
  for (const Projected& part : den_parts_) {
    const std::size_t k = part.view->k();
    for (std::size_t p = 0; p < k; ++p) {
      const double w = part.scale * (*part.view)(i, p);
      const double* row = part.agg.data() + p * r;
      for (std::size_t c = 0; c < r; ++c) out[c] += w * row[c];
    }
  }
}

double Assembly::den_total() const {
  const std::size_t r = r_, rows = f_->rows();
  std::vector<double> fsum(r, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    auto fi = f_->row(i);
    for (std::size_t c = 0; c < r; ++c) fsum[c] += fi[c];
  }
  double total = 0.0;
  for (std::size_t a = 0; a < r; ++a) {
    double row = 0.0;
    for (std::size_t c = 0; c < r; ++c) row += m_[a * r + c];
    total += fsum[a] * row;
  }
  for (double c : c_den_) total += static_cast<double>(rows) * c;
  for (const Projected& part : den_parts_) {
    const std::size_t k = part.view->k();
    for (std::size_t p = 0; p < k; ++p) {
      double vsum = 0.0;
      for (std::size_t i = 0; i < rows; ++i) vsum += (*part.view)(i, p);
      double asum = 0.0;
      for (std::size_t c = 0; c < r; ++c) asum += part.agg[p * r + c];
      total += part.scale * vsum * asum;
    }
  }
  return total;
}

void Assembly::num_row(std::size_t i, std::span<double> out) const {
  const std::size_t r = r_;
  for (std::size_t c = 0; c < r; ++c) out[c] = c_num_[c];
  for (const Projected& part : num_parts_) {
    const std::size_t k = part.view->k();
    for (std::size_t p = 0; p < k; ++p) {
      const double w = part.scale * (*part.view)(i, p);
      const double* row = part.agg.data() + p * r;
      for (std::size_t c = 0; c < r; ++c) out[c] += w * row[c];
    }
  }
  for (const Sums& part : sum_parts_) {
    const double s = (*part.sums)[i];
    for (std::size_t c = 0; c < r; ++c) out[c] += s * part.a[c];
  }
}

}  // namespace sketchnmf::detail
