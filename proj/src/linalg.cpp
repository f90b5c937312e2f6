#include "sketchnmf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sketchnmf/errors.hpp"

namespace sketchnmf {

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimMismatch("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      auto bp = b.row(p);
      for (std::size_t j = 0; j < ci.size(); ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimMismatch("matmul_tn: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    auto ap = a.row(p);
    auto bp = b.row(p);
    for (std::size_t i = 0; i < ap.size(); ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < bp.size(); ++j) ci[j] += api * bp[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimMismatch("matmul_nt: column counts differ");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto bj = b.row(j);
      double s = 0.0;
      for (std::size_t p = 0; p < ai.size(); ++p) s += ai[p] * bj[p];
      c(i, j) = s;
    }
  }
  return c;
}

DenseMatrix gram(const DenseMatrix& m) {
  DenseMatrix g = matmul_tn(m, m);
  // symmetrize exactly; the accumulation order differs between (i,j) and (j,i)
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = i + 1; j < g.cols(); ++j) g(j, i) = g(i, j);
  return g;
}

double frob_norm_sq(const DenseMatrix& m) noexcept {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

double frob_norm(const DenseMatrix& m) noexcept { return std::sqrt(frob_norm_sq(m)); }

double squared_norm(const Vector& v) noexcept {
  double s = 0.0;
  for (double x : v.data()) s += x * x;
  return s;
}

double frob_product_factored(const DenseMatrix& gu, const DenseMatrix& gv) {
  if (gu.rows() != gu.cols() || gv.rows() != gv.cols() || gu.rows() != gv.rows()) {
    throw DimMismatch("frob_product_factored: expected two p x p matrices");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < gu.rows(); ++i)
    for (std::size_t j = 0; j < gu.cols(); ++j) s += gu(i, j) * gv(j, i);
  return s;
}

namespace {

struct Reflector {
  std::size_t start;
  std::vector<double> v;
  double beta;
  bool flip;  // diagonal of R came out negative
};

TruncatedQr householder_qr(const DenseMatrix& m, bool truncate) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (cols > rows && !truncate) throw InvalidDim("qr_thin: more columns than rows");

  const double tol = kRankTolerance * frob_norm(m);
  DenseMatrix w = m;
  std::vector<Reflector> reflectors;
  std::vector<std::size_t> dropped;

  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t t = reflectors.size();
    double norm = 0.0;
    for (std::size_t i = t; i < rows; ++i) norm += w(i, j) * w(i, j);
    norm = std::sqrt(norm);
    if (t == rows || norm <= tol || norm == 0.0) {
      if (!truncate) throw RankDeficient(j);
      dropped.push_back(j);
      continue;
    }
    const double alpha = w(t, j) >= 0.0 ? -norm : norm;
    Reflector h{t, std::vector<double>(rows - t), 0.0, alpha < 0.0};
    for (std::size_t i = t; i < rows; ++i) h.v[i - t] = w(i, j);
    h.v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double x : h.v) vnorm2 += x * x;
    h.beta = 2.0 / vnorm2;

    for (std::size_t c = j + 1; c < cols; ++c) {
      double s = 0.0;
      for (std::size_t i = t; i < rows; ++i) s += h.v[i - t] * w(i, c);
      s *= h.beta;
      for (std::size_t i = t; i < rows; ++i) w(i, c) -= s * h.v[i - t];
    }
    reflectors.push_back(std::move(h));
  }
  if (reflectors.empty()) throw RankDeficient(0);

  // Q = H_0 ... H_{t-1} [I_t; 0], built back to front.
  const std::size_t kept = reflectors.size();
  DenseMatrix q(rows, kept);
  for (std::size_t c = 0; c < kept; ++c) q(c, c) = 1.0;
  for (std::size_t idx = kept; idx-- > 0;) {
    const auto& h = reflectors[idx];
    for (std::size_t c = 0; c < kept; ++c) {
      double s = 0.0;
      for (std::size_t i = h.start; i < rows; ++i) s += h.v[i - h.start] * q(i, c);
      if (s == 0.0) continue;
      s *= h.beta;
      for (std::size_t i = h.start; i < rows; ++i) q(i, c) -= s * h.v[i - h.start];
    }
  }
  for (std::size_t c = 0; c < kept; ++c) {
    if (!reflectors[c].flip) continue;
    for (std::size_t i = 0; i < rows; ++i) q(i, c) = -q(i, c);
  }
  return {std::move(q), std::move(dropped)};
}

}  // namespace

DenseMatrix qr_thin(const DenseMatrix& m) { return householder_qr(m, false).q; }

TruncatedQr qr_thin_truncated(const DenseMatrix& m) { return householder_qr(m, true); }

Vector symmetric_eigenvalues(const DenseMatrix& s) {
  if (s.rows() != s.cols()) throw DimMismatch("symmetric_eigenvalues: matrix not square");
  const std::size_t n = s.rows();
  DenseMatrix a = s;
  const double scale = frob_norm(a);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }

  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.data().begin(), eig.data().end(), std::greater<>());
  return eig;
}

Vector singular_values(const DenseMatrix& m) {
  const DenseMatrix g = m.rows() >= m.cols() ? gram(m) : matmul_nt(m, m);
  Vector sv = symmetric_eigenvalues(g);
  for (double& x : sv.data()) x = std::sqrt(std::max(x, 0.0));
  return sv;
}

}  // namespace sketchnmf
