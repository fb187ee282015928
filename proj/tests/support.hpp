#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <memory>
#include <random>

#include "etlalm/engine.hpp"
#include "etlalm/graph.hpp"
#include "etlalm/objective.hpp"

namespace testing_support {

using namespace etlalm;

inline Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

// √A for a PSD matrix, clamping round-off negative eigenvalues to 0.
inline Eigen::MatrixXd psd_sqrt(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es) {
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(r, c);
  for (double& v : m.data()) v = nd(rng);
  return m;
}

inline SymmetricMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  const Mat a = random_mat(n, n, seed);
  SymmetricMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) s.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  return s;
}

inline double max_rel_diff(const Mat& a, const Mat& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < a.data().size(); ++t) {
    num = std::max(num, std::abs(a.data()[t] - b.data()[t]));
    den = std::max(den, std::abs(b.data()[t]));
  }
  return num / std::max(den, 1e-300);
}

inline std::shared_ptr<const CompositeObjective> share(const ProblemInstance& inst) {
  return std::make_shared<CompositeObjective>(inst.objective);
}

// Uniform stepsizes satisfying H - βL - L_f ≻ 0 with margin 1.
inline RunConfig tuned_config(std::shared_ptr<const Graph> g,
                              std::shared_ptr<const CompositeObjective> obj,
                              const std::string& schedule, std::size_t rounds,
                              Variant variant = Variant::Composite) {
  RunConfig c;
  c.graph = g;
  c.objective = obj;
  c.schedule = parse_schedule(schedule);
  const double lmax = max_eigenvalue(laplacian(*g), 1e-12);
  c.beta = 1.0 / (lmax + 1.0);
  const Vec l = obj->lipschitz();
  c.eta.resize(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) c.eta[i] = 1.0 + l[i] + c.beta * lmax;
  c.rounds = rounds;
  c.variant = variant;
  return c;
}

}  // namespace testing_support
