#pragma once

#include <utility>
#include <vector>

#include "etlalm/engine.hpp"
#include "etlalm/reference.hpp"

namespace etlalm {

/// x̂_t = (1/t) Σ_{k=1}^{t} x_k, read from the trace's running sums.
Mat ergodic_average(const RunTrace& trace, std::size_t t);

/// ||√L v|| computed as sqrt(Σ_c v_cᵀ L v_c); √L is never formed.
double consensus_error(const SymmetricMatrix& lap, const Mat& v);

/// |Σ_i F_i(v_i) - F*|
double objective_gap(const CompositeObjective& obj, const Mat& v, double f_star);

/// ||x_k - 1⊗x*||_F / ||x_0 - 1⊗x*||_F. Throws std::domain_error when x_0 = 1⊗x*.
double primal_residual(const RunTrace& trace, std::size_t k, std::span<const double> x_star);
double primal_residual(const Mat& x, const Mat& x0, std::span<const double> x_star);

struct BroadcastSummary {
  std::vector<std::size_t> per_agent;         // totals, round-0 broadcast included
  std::vector<std::size_t> cumulative_total;  // all agents, through round k
  std::vector<std::size_t> cumulative_agent0; // agent 0, through round k
};

BroadcastSummary broadcast_summary(const RunTrace& trace);

enum class RateModel { LogLog, SemiLog };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares on (log t, log v) or (t, log v). Needs >= 10 points and v > 0.
RateFit rate_fit(const std::vector<std::pair<double, double>>& series, RateModel model);

/// Constants of the O(1/t) ergodic bound for a composite run and its evaluation.
struct Theorem1Certificate {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
  double y_star_norm = 0.0;
  double x0_distance_p = 0.0;   // ||x_0 - x*||_P
  double coupling_norm = 0.0;   // ||L (βL + 11ᵀ/n)^{-1}||
  double prefactor = 0.0;       // 2a√n / b
  std::vector<double> threshold_sums;  // Σ_{k=1}^{t} E_{k-1}, index t

  double a_t(std::size_t t) const;
  double numerator(std::size_t t) const;
  double bound_consensus(std::size_t t) const;
  double bound_objective_upper(std::size_t t) const;
  double bound_objective_lower(std::size_t t) const;
};

struct CertificateVerdict {
  std::size_t t = 0;
  double consensus = 0.0;
  double objective = 0.0;  // signed F(x̂_t) - F*
  bool consensus_ok = false;
  bool objective_ok = false;
};

struct CertificateReport {
  Theorem1Certificate certificate;
  std::vector<CertificateVerdict> verdicts;
  bool all_hold() const;
};

/// Largest agent count for which y* is recovered by eigendecomposition.
inline constexpr std::size_t kCertificateMaxAgents = 64;

/// Least-norm y* with √L y* = z* (per coordinate); n <= 64.
Mat least_norm_dual(const SymmetricMatrix& lap, const Mat& z_star);

/// Builds the bound constants for `rounds` rounds. Requires P - L_f ≻ 0, z_0 = 0,
/// and rho > ||y*||; throws ConfigError otherwise.
Theorem1Certificate make_theorem1_certificate(const RunConfig& config,
                                              const ReferenceSolution& ref, double rho);

/// Evaluates the bounds against every snapshotted x̂_t (t >= 1) of the trace.
CertificateReport theorem1_certificate(const RunConfig& config, const RunTrace& trace,
                                       const ReferenceSolution& ref, double rho);

/// Evaluates one round's verdict.
CertificateVerdict check_certificate(const Theorem1Certificate& cert, const SymmetricMatrix& lap,
                                     const CompositeObjective& obj, double f_star,
                                     const Mat& x_hat, std::size_t t);

}  // namespace etlalm
