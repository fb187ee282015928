#include "etlalm/reference.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace etlalm {

namespace {

struct Kink {
  double at;
  double weight;
};

// Breakpoints of Σ_i τ_i |u - c_i| on coordinate `coord`, merged and sorted.
std::vector<Kink> kinks(const CompositeObjective& obj, std::size_t coord) {
  std::vector<Kink> out;
  for (std::size_t i = 0; i < obj.agents(); ++i) {
    const NonsmoothPart& g = obj.nonsmooth(i);
    if (g.is_zero()) continue;
    const auto* l1 = dynamic_cast<const WeightedL1*>(&g);
    if (!l1) throw ConfigError("centralized solver supports only l1 or zero nonsmooth parts");
    out.push_back({l1->center()[coord], l1->tau()});
  }
  std::sort(out.begin(), out.end(), [](const Kink& a, const Kink& b) { return a.at < b.at; });
  std::vector<Kink> merged;
  for (const Kink& k : out) {
    if (!merged.empty() && merged.back().at == k.at)
      merged.back().weight += k.weight;
    else
      merged.push_back(k);
  }
  return merged;
}

// argmin_u Σ w_k |u - b_k| + (u - y)²/(2t): the subgradient
// (u - y)/t + Σ w_k sgn(u - b_k) is monotone, so scan the pieces.
double prox_1d(const std::vector<Kink>& ks, double t, double y) {
  double total = 0.0;
  for (const Kink& k : ks) total += k.weight;
  double below = 0.0;  // weight of kinks left of the current piece
  for (std::size_t k = 0; k <= ks.size(); ++k) {
    const double slope = below - (total - below);
    const double u = y - t * slope;
    const double lo = k == 0 ? -INFINITY : ks[k - 1].at;
    const double hi = k == ks.size() ? INFINITY : ks[k].at;
    if (u > lo && u < hi) return u;
    if (k == ks.size()) break;
    // stationary exactly at the kink when 0 lies in the jump of the subgradient
    const double left = (hi - y) / t + slope;
    const double right = left + 2.0 * ks[k].weight;
    if (left <= 0.0 && right >= 0.0) return hi;
    below += ks[k].weight;
  }
  return y;  // unreachable for finite data
}

double weighted_median(const std::vector<Kink>& ks) {
  double total = 0.0;
  for (const Kink& k : ks) total += k.weight;
  double acc = 0.0;
  for (const Kink& k : ks) {
    acc += k.weight;
    if (acc >= 0.5 * total) return k.at;
  }
  return 0.0;
}

bool all_quadratic(const CompositeObjective& obj) {
  for (std::size_t i = 0; i < obj.agents(); ++i)
    if (!dynamic_cast<const DiagonalQuadratic*>(&obj.smooth(i)) || !obj.nonsmooth(i).is_zero())
      return false;
  return true;
}

Vec gradient_sum(const CompositeObjective& obj, std::span<const double> theta) {
  Vec sum(obj.dim(), 0.0), g(obj.dim());
  for (std::size_t i = 0; i < obj.agents(); ++i) {
    obj.smooth(i).gradient(theta, g);
    for (std::size_t c = 0; c < g.size(); ++c) sum[c] += g[c];
  }
  return sum;
}

}  // namespace

void prox_of_sum(const CompositeObjective& obj, double t, std::span<const double> y,
                 std::span<double> out) {
  for (std::size_t c = 0; c < obj.dim(); ++c) out[c] = prox_1d(kinks(obj, c), t, y[c]);
}

Mat replicate(std::span<const double> theta, std::size_t agents) {
  Mat out(agents, theta.size());
  for (std::size_t i = 0; i < agents; ++i) std::copy(theta.begin(), theta.end(), out.row(i).begin());
  return out;
}

ReferenceSolution solve_centralized(const CompositeObjective& obj, double tol,
                                    std::size_t max_iter) {
  const std::size_t m = obj.dim();
  ReferenceSolution sol;
  sol.tol = tol;

  if (all_quadratic(obj)) {
    Vec num(m, 0.0), den(m, 0.0);
    for (std::size_t i = 0; i < obj.agents(); ++i) {
      const auto& q = dynamic_cast<const DiagonalQuadratic&>(obj.smooth(i));
      for (std::size_t c = 0; c < m; ++c) {
        num[c] += q.diag()[c] * q.center()[c];
        den[c] += q.diag()[c];
      }
    }
    for (std::size_t c = 0; c < m; ++c) num[c] /= den[c];
    sol.x_star = std::move(num);
    sol.solver_residual = vec::norm(gradient_sum(obj, sol.x_star));
    sol.certified = sol.solver_residual <= tol;
    sol.f_star = obj.value_common(sol.x_star);
    return sol;
  }

  double l = 0.0;
  for (double li : obj.lipschitz()) l += li;

  if (l == 0.0) {
    sol.x_star.assign(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
      const auto ks = kinks(obj, c);
      if (!ks.empty()) sol.x_star[c] = weighted_median(ks);
    }
    sol.certified = true;
    sol.f_star = obj.value_common(sol.x_star);
    return sol;
  }

  Vec theta(m, 0.0), next(m), step(m);
  double residual = 0.0;
  std::size_t it = 0;
  for (;; ++it) {
    const Vec grad = gradient_sum(obj, theta);
    for (std::size_t c = 0; c < m; ++c) step[c] = theta[c] - grad[c] / l;
    prox_of_sum(obj, 1.0 / l, step, next);
    residual = l * vec::distance(theta, next);
    if (residual <= tol || it == max_iter) break;
    theta.swap(next);
  }
  sol.x_star = std::move(theta);
  sol.iterations = it;
  sol.solver_residual = residual;
  sol.certified = residual <= tol;
  sol.f_star = obj.value_common(sol.x_star);
  return sol;
}

double kkt_residual(const Mat& x, const Mat& z, const CompositeObjective& obj,
                    const SymmetricMatrix& lap) {
  const std::size_t m = obj.dim();
  Vec grad(m), w(m), p(m);
  double stationarity = 0.0;
  for (std::size_t i = 0; i < obj.agents(); ++i) {
    obj.smooth(i).gradient(x.row(i), grad);
    for (std::size_t c = 0; c < m; ++c) w[c] = -z(i, c) - grad[c];
    obj.nonsmooth(i).project_subdifferential(x.row(i), w, p);
    for (std::size_t c = 0; c < m; ++c) stationarity += (w[c] - p[c]) * (w[c] - p[c]);
  }
  return std::sqrt(stationarity) + std::sqrt(std::max(0.0, lap.quadratic_form(x)));
}

Mat recover_dual(const CompositeObjective& obj, std::span<const double> x_star) {
  const std::size_t n = obj.agents(), m = obj.dim();
  Mat grads(n, m);
  Vec avg(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    obj.smooth(i).gradient(x_star, grads.row(i));
    for (std::size_t c = 0; c < m; ++c) avg[c] -= grads(i, c) / static_cast<double>(n);
  }
  Mat z(n, m);
  Vec s(m);
  Vec mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    obj.nonsmooth(i).project_subdifferential(x_star, avg, s);
    for (std::size_t c = 0; c < m; ++c) {
      z(i, c) = -grads(i, c) - s[c];
      mean[c] += z(i, c) / static_cast<double>(n);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < m; ++c) z(i, c) -= mean[c];
  return z;
}

void write_reference(std::ostream& os, const ReferenceSolution& ref, std::uint64_t instance_hash) {
  os << "etlalm-reference 1\n"
     << "instance " << instance_hash << '\n'
     << "tol " << format_number(ref.tol) << '\n'
     << "iterations " << ref.iterations << '\n'
     << "certified " << (ref.certified ? 1 : 0) << '\n'
     << "residual " << format_number(ref.solver_residual) << '\n'
     << "f_star " << format_number(ref.f_star) << '\n'
     << "x_star " << ref.x_star.size() << '\n';
  for (std::size_t c = 0; c < ref.x_star.size(); ++c)
    os << (c ? " " : "") << format_number(ref.x_star[c]);
  os << '\n';
}

bool read_reference(std::istream& is, std::uint64_t instance_hash, double tol,
                    ReferenceSolution& out) {
  std::string key;
  int version = 0;
  std::uint64_t hash = 0;
  ReferenceSolution r;
  int certified = 0;
  std::size_t m = 0;
  if (!(is >> key >> version) || key != "etlalm-reference" || version != 1) return false;
  if (!(is >> key >> hash) || key != "instance" || hash != instance_hash) return false;
  if (!(is >> key >> r.tol) || key != "tol" || r.tol != tol) return false;
  if (!(is >> key >> r.iterations) || key != "iterations") return false;
  if (!(is >> key >> certified) || key != "certified") return false;
  if (!(is >> key >> r.solver_residual) || key != "residual") return false;
  if (!(is >> key >> r.f_star) || key != "f_star") return false;
  if (!(is >> key >> m) || key != "x_star") return false;
  r.x_star.resize(m);
  for (double& v : r.x_star)
    if (!(is >> v)) return false;
  r.certified = certified != 0;
  out = std::move(r);
  return true;
}

}  // namespace etlalm
