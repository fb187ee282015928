#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "etlalm/types.hpp"

namespace etlalm {

/// Smooth convex part f_i with its curvature certificate: gradient Lipschitz
/// constant l and strong-convexity modulus μ (0 when merely convex).
class SmoothPart {
 public:
  SmoothPart(std::size_t dim, double lipschitz, double strong_convexity)
      : dim_(dim), lipschitz_(lipschitz), strong_convexity_(strong_convexity) {}
  virtual ~SmoothPart() = default;

  std::size_t dim() const { return dim_; }
  double lipschitz() const { return lipschitz_; }
  double strong_convexity() const { return strong_convexity_; }

  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual bool is_zero() const { return false; }

 private:
  std::size_t dim_;
  double lipschitz_;
  double strong_convexity_;
};

/// Nonsmooth convex part g_i, accessed through its proximal map.
class NonsmoothPart {
 public:
  explicit NonsmoothPart(std::size_t dim) : dim_(dim) {}
  virtual ~NonsmoothPart() = default;

  std::size_t dim() const { return dim_; }

  virtual double value(std::span<const double> x) const = 0;
  /// argmin_u g(u) + ||u - y||² / (2t)
  virtual void prox(double t, std::span<const double> y, std::span<double> out) const = 0;
  /// Nearest point to w in the subdifferential ∂g(x).
  virtual void project_subdifferential(std::span<const double> x, std::span<const double> w,
                                       std::span<double> out) const = 0;
  virtual bool is_zero() const { return false; }

 private:
  std::size_t dim_;
};

class ZeroSmooth final : public SmoothPart {
 public:
  explicit ZeroSmooth(std::size_t dim) : SmoothPart(dim, 0.0, 0.0) {}
  double value(std::span<const double>) const override { return 0.0; }
  void gradient(std::span<const double>, std::span<double> out) const override;
  bool is_zero() const override { return true; }
};

/// ½||b - Aθ||²
class LeastSquares final : public SmoothPart {
 public:
  LeastSquares(Mat a, Vec b);
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  const Mat& a() const { return a_; }
  const Vec& b() const { return b_; }

 private:
  Mat a_;
  Vec b_;
};

/// Σ_j ln(1 + exp(-y_j <M_j, θ>)) + (ε/2)||θ||²
class Logistic final : public SmoothPart {
 public:
  Logistic(Mat features, Vec labels, double ridge = 0.0);
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  double ridge() const { return ridge_; }

 private:
  Mat features_;
  Vec labels_;
  double ridge_;
};

/// ½(θ - c)ᵀ diag(d) (θ - c)
class DiagonalQuadratic final : public SmoothPart {
 public:
  DiagonalQuadratic(Vec d, Vec c);
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  const Vec& diag() const { return d_; }
  const Vec& center() const { return c_; }

 private:
  Vec d_;
  Vec c_;
};

class ZeroNonsmooth final : public NonsmoothPart {
 public:
  using NonsmoothPart::NonsmoothPart;
  double value(std::span<const double>) const override { return 0.0; }
  void prox(double t, std::span<const double> y, std::span<double> out) const override;
  void project_subdifferential(std::span<const double> x, std::span<const double> w,
                               std::span<double> out) const override;
  bool is_zero() const override { return true; }
};

/// τ||θ - c||₁ (c = 0 unless given)
class WeightedL1 final : public NonsmoothPart {
 public:
  WeightedL1(std::size_t dim, double tau);
  WeightedL1(double tau, Vec center);
  double value(std::span<const double> x) const override;
  void prox(double t, std::span<const double> y, std::span<double> out) const override;
  void project_subdifferential(std::span<const double> x, std::span<const double> w,
                               std::span<double> out) const override;
  bool is_zero() const override { return tau_ == 0.0; }
  double tau() const { return tau_; }
  const Vec& center() const { return center_; }

 private:
  double tau_;
  Vec center_;
};

/// sign(y_j) max(|y_j| - t, 0), component-wise.
Vec soft_threshold(std::span<const double> y, double t);

/// F = Σ_i f_i + g_i over n agents sharing dimension m.
class CompositeObjective {
 public:
  CompositeObjective() = default;
  CompositeObjective(std::vector<std::shared_ptr<const SmoothPart>> smooth,
                     std::vector<std::shared_ptr<const NonsmoothPart>> nonsmooth);

  std::size_t agents() const { return smooth_.size(); }
  std::size_t dim() const { return dim_; }
  const SmoothPart& smooth(std::size_t i) const { return *smooth_[i]; }
  const NonsmoothPart& nonsmooth(std::size_t i) const { return *nonsmooth_[i]; }

  /// F_i(x) for agent i.
  double value(std::size_t i, std::span<const double> x) const;
  /// Σ_i F_i(row i of x).
  double value(const Mat& x) const;
  /// Σ_i F_i(θ) for a common θ.
  double value_common(std::span<const double> theta) const;

  bool smooth_is_zero() const;
  bool nonsmooth_is_zero() const;
  Vec lipschitz() const;
  Vec strong_convexity() const;

 private:
  std::vector<std::shared_ptr<const SmoothPart>> smooth_;
  std::vector<std::shared_ptr<const NonsmoothPart>> nonsmooth_;
  std::size_t dim_ = 0;
};

enum class ProblemKind { Lasso, Logistic, Quadratic };

std::string to_string(ProblemKind k);
ProblemKind parse_problem_kind(const std::string& s);

struct InstanceParams {
  std::size_t agents = 0;
  std::size_t dim = 0;
  std::size_t rows = 0;  // p_i (lasso) or m_i (logistic); unused for quadratic
  double tau = 0.0;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  friend bool operator==(const InstanceParams&, const InstanceParams&) = default;
};

/// A generated problem: the objective plus the raw per-agent data it was built from.
/// Lasso: (A_i, b_i). Logistic: (features M_i, labels y_i). Quadratic: (1 x m row of D_i, c_i).
struct ProblemInstance {
  ProblemKind kind = ProblemKind::Lasso;
  InstanceParams params;
  std::vector<Mat> matrices;
  std::vector<Vec> vectors;
  CompositeObjective objective;
};

ProblemInstance make_lasso_instance(std::size_t n, std::size_t p, std::size_t m, double tau,
                                    std::uint64_t seed);
ProblemInstance make_logistic_instance(std::size_t n, std::size_t samples, std::size_t m,
                                       std::uint64_t seed, double ridge = 0.0);
ProblemInstance make_quadratic_instance(std::size_t n, std::size_t m, std::uint64_t seed);

/// Rebuilds the objective from kind, params and raw data.
CompositeObjective build_objective(ProblemKind kind, const InstanceParams& params,
                                   const std::vector<Mat>& matrices,
                                   const std::vector<Vec>& vectors);

/// Closed-form minimizer (Σ D_i)^{-1} Σ D_i c_i of a quadratic instance.
Vec quadratic_minimizer(const ProblemInstance& inst);

void write_instance(std::ostream& os, const ProblemInstance& inst);
ProblemInstance read_instance(std::istream& is);
std::string to_text(const ProblemInstance& inst);

/// FNV-1a over the serialized text.
std::uint64_t instance_hash(const ProblemInstance& inst);

/// Shared number formatting for every text artifact: 17 significant digits.
std::string format_number(double v);

}  // namespace etlalm
