#include "etlalm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace etlalm {

namespace vec {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a[i] - b[i]));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / scale;
    s += d * d;
  }
  return scale * std::sqrt(s);
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace vec

SymmetricMatrix::SymmetricMatrix(Mat m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("SymmetricMatrix: not square");
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = i + 1; j < m_.cols(); ++j)
      if (m_(i, j) != m_(j, i)) throw std::invalid_argument("SymmetricMatrix: not symmetric");
}

void SymmetricMatrix::set(std::size_t i, std::size_t j, double v) {
  m_(i, j) = v;
  m_(j, i) = v;
}

void SymmetricMatrix::apply(std::span<const double> v, std::span<double> out) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m_(i, j) * v[j];
    out[i] = s;
  }
}

Mat SymmetricMatrix::apply(const Mat& x) const {
  const std::size_t n = size();
  Mat out(n, x.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = m_(i, j);
      if (a == 0.0) continue;
      for (std::size_t c = 0; c < x.cols(); ++c) out(i, c) += a * x(j, c);
    }
  return out;
}

double SymmetricMatrix::quadratic_form(const Mat& x) const {
  const Mat mx = apply(x);
  return vec::dot(x.data(), mx.data());
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) {
  SymmetricMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
  return m;
}

EigenDecomposition symmetric_eigen(const SymmetricMatrix& sym, std::size_t max_sweeps) {
  const std::size_t n = sym.size();
  Mat a = sym.dense();
  Mat v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };
  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);

  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    const double off = off_norm();
    if (off <= 1e-15 * frob || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_norm() > 1e-12 * frob)
    throw NumericalError("Jacobi eigensolve did not converge", sweep);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  out.sweeps = sweep;
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

namespace {

// Power iteration on M + shift*I, which the caller guarantees is PSD.
// Returns false when the iteration budget ran out.
bool power_iterate(const SymmetricMatrix& m, double shift, double scale, const EigenOptions& opts,
                   std::size_t budget, double& lambda) {
  const std::size_t n = m.size();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec v(n), w(n);
  for (double& x : v) x = unif(rng);
  double nv = vec::norm(v);
  for (double& x : v) x /= nv;

  for (std::size_t it = 0; it < budget; ++it) {
    m.apply(v, w);
    for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
    const double rq = vec::dot(v, w);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) r2 += (w[i] - rq * v[i]) * (w[i] - rq * v[i]);
    if (std::sqrt(r2) <= opts.tol * scale) {
      lambda = rq - shift;
      return true;
    }
    const double nw = vec::norm(w);
    if (nw == 0.0) {
      lambda = -shift;
      return true;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return false;
}

}  // namespace

double max_eigenvalue(const SymmetricMatrix& m, const EigenOptions& opts) {
  const std::size_t n = m.size();
  if (n == 0) throw std::invalid_argument("max_eigenvalue: empty matrix");
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(m(i, j));
    const double l = m(i, i) - radius, h = m(i, i) + radius;
    lo = i == 0 ? l : std::min(lo, l);
    hi = i == 0 ? h : std::max(hi, h);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (scale == 0.0) return 0.0;

  const bool dense_ok = n <= opts.dense_limit;
  const std::size_t budget = dense_ok ? std::min<std::size_t>(opts.max_iter, 2000) : opts.max_iter;
  double lambda = 0.0;
  if (power_iterate(m, std::max(0.0, -lo), scale, opts, budget, lambda)) return lambda;
  if (!dense_ok) throw NumericalError("power iteration did not converge", budget);
  return symmetric_eigen(m).values.back();
}

double max_eigenvalue(const SymmetricMatrix& m, double tol) {
  EigenOptions o;
  o.tol = tol;
  return max_eigenvalue(m, o);
}

double min_eigenvalue(const SymmetricMatrix& m, const EigenOptions& opts) {
  const std::size_t n = m.size();
  const double c = max_eigenvalue(m, opts) + 1.0;
  Mat shifted(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) shifted(i, j) = (i == j ? c : 0.0) - m(i, j);
  return c - max_eigenvalue(SymmetricMatrix(std::move(shifted)), opts);
}

double min_eigenvalue(const SymmetricMatrix& m, double tol) {
  EigenOptions o;
  o.tol = tol;
  return min_eigenvalue(m, o);
}

}  // namespace etlalm
