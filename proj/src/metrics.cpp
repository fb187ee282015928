#include "etlalm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etlalm {

Mat ergodic_average(const RunTrace& trace, std::size_t t) {
  if (t == 0 || t >= trace.records.size())
    throw std::out_of_range("ergodic_average: t = " + std::to_string(t) + " outside [1, " +
                            std::to_string(trace.records.size() - 1) + "]");
  const RoundRecord& rec = trace.records[t];
  if (!rec.has_snapshot)
    throw std::out_of_range("ergodic_average: round " + std::to_string(t) + " was thinned");
  Mat out = rec.ergodic_sum;
  for (double& v : out.data()) v /= static_cast<double>(t);
  return out;
}

double consensus_error(const SymmetricMatrix& lap, const Mat& v) {
  return std::sqrt(std::max(0.0, lap.quadratic_form(v)));
}

double objective_gap(const CompositeObjective& obj, const Mat& v, double f_star) {
  return std::abs(obj.value(v) - f_star);
}

double primal_residual(const Mat& x, const Mat& x0, std::span<const double> x_star) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      num += (x(i, c) - x_star[c]) * (x(i, c) - x_star[c]);
      den += (x0(i, c) - x_star[c]) * (x0(i, c) - x_star[c]);
    }
  if (den == 0.0) throw std::domain_error("primal_residual: x_0 already equals 1 (x) x*");
  return std::sqrt(num / den);
}

double primal_residual(const RunTrace& trace, std::size_t k, std::span<const double> x_star) {
  if (k >= trace.records.size()) throw std::out_of_range("primal_residual: round out of range");
  const RoundRecord& rec = trace.records[k];
  const RoundRecord& first = trace.records.front();
  if (!rec.has_snapshot || !first.has_snapshot)
    throw std::out_of_range("primal_residual: round " + std::to_string(k) + " was thinned");
  return primal_residual(rec.x, first.x, x_star);
}

BroadcastSummary broadcast_summary(const RunTrace& trace) {
  BroadcastSummary s;
  s.per_agent.assign(trace.agents, 0);
  std::size_t total = 0;
  for (const RoundRecord& rec : trace.records) {
    for (std::size_t i = 0; i < rec.broadcasts.size(); ++i) {
      s.per_agent[i] += rec.broadcasts[i];
      total += rec.broadcasts[i];
    }
    s.cumulative_total.push_back(total);
    s.cumulative_agent0.push_back(s.per_agent.empty() ? 0 : s.per_agent[0]);
  }
  return s;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& series, RateModel model) {
  if (series.size() < 10) throw std::invalid_argument("rate_fit: need at least 10 points");
  const double n = static_cast<double>(series.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(series.size());
  for (auto [t, v] : series) {
    if (!(v > 0.0)) throw std::invalid_argument("rate_fit: values must be positive");
    if (model == RateModel::LogLog && !(t > 0.0))
      throw std::invalid_argument("rate_fit: loglog needs t > 0");
    const double x = model == RateModel::LogLog ? std::log(t) : t;
    const double y = std::log(v);
    pts.emplace_back(x, y);
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  for (auto [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (auto [x, y] : pts) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
    ss_tot += (y - my) * (y - my);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

double Theorem1Certificate::a_t(std::size_t t) const {
  if (t >= threshold_sums.size()) throw std::out_of_range("certificate: t beyond horizon");
  return prefactor * threshold_sums[t];
}

double Theorem1Certificate::numerator(std::size_t t) const {
  const double base = x0_distance_p + rho * coupling_norm + std::sqrt(2.0 * b) * a_t(t);
  return base * base;
}

double Theorem1Certificate::bound_consensus(std::size_t t) const {
  return numerator(t) / (2.0 * static_cast<double>(t) * (rho - y_star_norm));
}

double Theorem1Certificate::bound_objective_upper(std::size_t t) const {
  return numerator(t) / (2.0 * static_cast<double>(t));
}

double Theorem1Certificate::bound_objective_lower(std::size_t t) const {
  return -y_star_norm * bound_consensus(t);
}

bool CertificateReport::all_hold() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const CertificateVerdict& v) { return v.consensus_ok && v.objective_ok; });
}

Mat least_norm_dual(const SymmetricMatrix& lap, const Mat& z_star) {
  const std::size_t n = lap.size();
  if (n > kCertificateMaxAgents)
    throw ConfigError("least-norm dual recovery supports at most 64 agents");
  const EigenDecomposition eig = symmetric_eigen(lap);
  const double cutoff = 1e-10 * std::max(1.0, eig.values.back());
  Mat y(n, z_star.cols());
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = eig.values[k];
    if (lambda <= cutoff) continue;
    for (std::size_t c = 0; c < z_star.cols(); ++c) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += eig.vectors(i, k) * z_star(i, c);
      proj /= std::sqrt(lambda);
      for (std::size_t i = 0; i < n; ++i) y(i, c) += proj * eig.vectors(i, k);
    }
  }
  return y;
}

namespace {

SymmetricMatrix symmetrized(const Mat& m) {
  Mat s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return SymmetricMatrix(std::move(s));
}

Mat multiply(const Mat& a, const Mat& b) {
  Mat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
  return out;
}

}  // namespace

Theorem1Certificate make_theorem1_certificate(const RunConfig& config,
                                              const ReferenceSolution& ref, double rho) {
  const Graph& g = *config.graph;
  const CompositeObjective& obj = *config.objective;
  const std::size_t n = g.size(), m = obj.dim();
  if (n > kCertificateMaxAgents)
    throw ConfigError("certificate supports at most 64 agents (got " + std::to_string(n) + ")");
  if (config.z0 && vec::max_abs(config.z0->data()) != 0.0)
    throw ConfigError("certificate requires z_0 = 0");
  if (config.schedule.any_periodic())
    throw ConfigError("certificate needs an event-triggered schedule, not everyN");

  const SymmetricMatrix lap = laplacian(g);
  const Vec lf = obj.lipschitz();
  const StepsizeCheck check = check_stepsize_composite(config.eta, config.beta, lap, lf);
  if (!check.ok)
    throw ConfigError("certificate requires P - L_f > 0 (margin " + format_number(check.margin) +
                      ")");

  Theorem1Certificate cert;
  cert.rho = rho;
  cert.a = std::max(2.0 * config.beta * max_eigenvalue(lap, 1e-12), 1.0);

  // M = βL + 11ᵀ/n, inverted through its eigendecomposition.
  Mat mm(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      mm(i, j) = config.beta * lap(i, j) + 1.0 / static_cast<double>(n);
  const EigenDecomposition eig = symmetric_eigen(symmetrized(mm));
  const double lf_min = *std::min_element(lf.begin(), lf.end());
  cert.b = std::min(lf_min, 1.0 / eig.values.back());
  if (!(cert.b > 0.0)) throw ConfigError("certificate requires every l_f > 0");

  Mat m_inv(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m_inv(i, j) += eig.vectors(i, k) * eig.vectors(j, k) / eig.values[k];
  const Mat coupling = multiply(lap.dense(), m_inv);
  Mat gram(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) gram(i, j) += coupling(k, i) * coupling(k, j);
  cert.coupling_norm = std::sqrt(std::max(0.0, symmetric_eigen(symmetrized(gram)).values.back()));

  const Mat x0 = config.x0.value_or(Mat(n, m));
  Mat diff(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < m; ++c) diff(i, c) = x0(i, c) - ref.x_star[c];
  Mat p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p(i, j) = (i == j ? config.eta[i] : 0.0) - config.beta * lap(i, j);
  cert.x0_distance_p = std::sqrt(std::max(0.0, SymmetricMatrix(p).quadratic_form(diff)));

  const Mat z_star = recover_dual(obj, ref.x_star);
  cert.y_star_norm = vec::norm(least_norm_dual(lap, z_star).data());
  if (!(rho > cert.y_star_norm))
    throw ConfigError("rho = " + format_number(rho) + " must exceed ||y*|| = " +
                      format_number(cert.y_star_norm));

  cert.prefactor = 2.0 * cert.a * std::sqrt(static_cast<double>(n)) / cert.b;
  cert.threshold_sums.assign(config.rounds + 1, 0.0);
  for (std::size_t t = 1; t <= config.rounds; ++t)
    cert.threshold_sums[t] = cert.threshold_sums[t - 1] + max_threshold(config.schedule, n, t - 1);
  return cert;
}

CertificateVerdict check_certificate(const Theorem1Certificate& cert, const SymmetricMatrix& lap,
                                     const CompositeObjective& obj, double f_star,
                                     const Mat& x_hat, std::size_t t) {
  CertificateVerdict v;
  v.t = t;
  v.consensus = consensus_error(lap, x_hat);
  v.objective = obj.value(x_hat) - f_star;
  v.consensus_ok = v.consensus <= cert.bound_consensus(t);
  v.objective_ok =
      v.objective >= cert.bound_objective_lower(t) && v.objective <= cert.bound_objective_upper(t);
  return v;
}

CertificateReport theorem1_certificate(const RunConfig& config, const RunTrace& trace,
                                       const ReferenceSolution& ref, double rho) {
  CertificateReport report;
  report.certificate = make_theorem1_certificate(config, ref, rho);
  const SymmetricMatrix lap = laplacian(*config.graph);
  for (std::size_t t = 1; t < trace.records.size(); ++t) {
    if (!trace.records[t].has_snapshot) continue;
    report.verdicts.push_back(check_certificate(report.certificate, lap, *config.objective,
                                                ref.f_star, ergodic_average(trace, t), t));
  }
  return report;
}

}  // namespace etlalm
