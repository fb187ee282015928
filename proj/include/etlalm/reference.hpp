#pragma once

#include <iosfwd>

#include "etlalm/graph.hpp"
#include "etlalm/objective.hpp"

namespace etlalm {

struct ReferenceSolution {
  Vec x_star;
  double f_star = 0.0;
  double solver_residual = 0.0;  // prox-gradient mapping norm at x_star
  std::size_t iterations = 0;
  bool certified = false;        // solver_residual <= tol
  double tol = 0.0;
};

/// Minimizes Σ_i f_i(θ) + g_i(θ) over a common θ by proximal gradient with step
/// 1/Σ l_i. The l1 parts are summed into one exact prox. Quadratic objectives
/// use the closed form; f ≡ 0 reduces to a coordinate-wise weighted median.
/// Exhausting max_iter returns the last point with certified = false.
ReferenceSolution solve_centralized(const CompositeObjective& obj, double tol = 1e-10,
                                    std::size_t max_iter = 1000000);

/// prox of t·Σ_i g_i when every g_i is WeightedL1 or zero.
void prox_of_sum(const CompositeObjective& obj, double t, std::span<const double> y,
                 std::span<double> out);

/// dist(-z, ∇f(x) + ∂g(x)) in stacked Frobenius form plus ||x||_L = sqrt(Σ_c x_cᵀ L x_c).
double kkt_residual(const Mat& x, const Mat& z, const CompositeObjective& obj,
                    const SymmetricMatrix& lap);

/// Dual optimum in z-form: z*_i = -∇f_i(x*) - s_i with s_i the point of ∂g_i(x*)
/// nearest the average -(1/n)Σ_j ∇f_j(x*); projected so that Σ_i z*_i = 0.
Mat recover_dual(const CompositeObjective& obj, std::span<const double> x_star);

/// Stacked 1 ⊗ θ for n agents.
Mat replicate(std::span<const double> theta, std::size_t agents);

void write_reference(std::ostream& os, const ReferenceSolution& ref, std::uint64_t instance_hash);
/// Reads a cached solution; returns false when the key (hash, tol) does not match.
bool read_reference(std::istream& is, std::uint64_t instance_hash, double tol,
                    ReferenceSolution& out);

}  // namespace etlalm
