#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <sstream>

#include "etlalm/reference.hpp"
#include "support.hpp"

using namespace etlalm;
using testing_support::share;
using testing_support::to_eigen;

namespace {

CompositeObjective one_dimensional() {
  Mat a(1, 1, 1.0);
  return CompositeObjective({std::make_shared<LeastSquares>(a, Vec{3.0})},
                            {std::make_shared<WeightedL1>(1, 1.0)});
}

}  // namespace

TEST_CASE("one-dimensional l1 problem") {
  const ReferenceSolution r = solve_centralized(one_dimensional());
  CHECK(r.x_star[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.f_star == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(r.certified);
}

TEST_CASE("quadratic instance matches the closed form") {
  const ProblemInstance inst = make_quadratic_instance(7, 4, 3);
  const ReferenceSolution r = solve_centralized(inst.objective);
  const Vec closed = quadratic_minimizer(inst);
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(r.x_star[c] - closed[c]) <= 1e-10);
}

TEST_CASE("huge tolerance returns the start point") {
  const ProblemInstance inst = make_lasso_instance(4, 3, 5, 0.1, 3);
  const ReferenceSolution r = solve_centralized(inst.objective, 1e300);
  CHECK(r.iterations == 0);
  CHECK(r.x_star == Vec(5, 0.0));
}

TEST_CASE("proximal gradient is monotone in objective value") {
  const ProblemInstance inst = make_lasso_instance(6, 3, 8, 0.01, 5);
  double prev = INFINITY;
  for (std::size_t it : {0u, 1u, 2u, 5u, 10u, 50u, 200u}) {
    const ReferenceSolution r = solve_centralized(inst.objective, 0.0, it);
    CHECK(r.f_star <= prev + 1e-14);
    prev = r.f_star;
  }
}

TEST_CASE("lasso optimum satisfies the optimality condition") {
  const ProblemInstance inst = make_lasso_instance(8, 3, 6, 0.01, 7);
  const ReferenceSolution r = solve_centralized(inst.objective, 1e-11);
  REQUIRE(r.certified);
  const Mat x = replicate(r.x_star, 8);
  const Mat z = recover_dual(inst.objective, r.x_star);
  const SymmetricMatrix lap = laplacian(generate_random_graph(8, 0.5, 1));
  CHECK(kkt_residual(x, z, inst.objective, lap) <= 1e-6);
  // z* sums to zero, so it lies in the range of √L
  for (std::size_t c = 0; c < 6; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < 8; ++i) s += z(i, c);
    CHECK(std::abs(s) <= 1e-12);
  }
}

TEST_CASE("recovered dual solves sqrt(L) y = z") {
  const ProblemInstance inst = make_quadratic_instance(9, 2, 4);
  const ReferenceSolution r = solve_centralized(inst.objective);
  const Mat z = recover_dual(inst.objective, r.x_star);
  const Graph g = generate_random_graph(9, 0.4, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(laplacian(g).dense()));
  const Eigen::MatrixXd sqrt_l = testing_support::psd_sqrt(es);
  const Eigen::MatrixXd ze = to_eigen(z);
  // least squares solution of √L y = z reproduces z exactly when z ⟂ 1
  const Eigen::MatrixXd y = sqrt_l.completeOrthogonalDecomposition().solve(ze);
  CHECK((sqrt_l * y - ze).norm() <= 1e-9 * std::max(1.0, ze.norm()));
}

TEST_CASE("kkt residual basics") {
  const ProblemInstance inst = make_quadratic_instance(5, 2, 8);
  const SymmetricMatrix lap = laplacian(path_graph(5));
  const ReferenceSolution r = solve_centralized(inst.objective);
  CHECK(kkt_residual(replicate(r.x_star, 5), recover_dual(inst.objective, r.x_star),
                     inst.objective, lap) <= 1e-10);
  Mat x = replicate(r.x_star, 5);
  x(0, 0) += 1.0;
  CHECK(kkt_residual(x, recover_dual(inst.objective, r.x_star), inst.objective, lap) >=
        std::sqrt(lap.quadratic_form(x)));
}

TEST_CASE("f = 0 reduces to a weighted median") {
  std::vector<std::shared_ptr<const SmoothPart>> f;
  std::vector<std::shared_ptr<const NonsmoothPart>> g;
  const double centers[] = {1.0, 5.0, 2.0};
  for (double c : centers) {
    f.push_back(std::make_shared<ZeroSmooth>(1));
    g.push_back(std::make_shared<WeightedL1>(1.0, Vec{c}));
  }
  const ReferenceSolution r = solve_centralized(CompositeObjective(f, g));
  CHECK(r.x_star[0] == 2.0);
  CHECK(r.f_star == 4.0);
}

TEST_CASE("reference file round trip keyed by hash and tolerance") {
  const ReferenceSolution r = solve_centralized(one_dimensional());
  std::ostringstream os;
  write_reference(os, r, 42);
  ReferenceSolution back;
  std::istringstream a(os.str());
  CHECK(read_reference(a, 42, r.tol, back));
  CHECK(back.x_star == r.x_star);
  CHECK(back.f_star == r.f_star);
  std::istringstream b(os.str());
  CHECK_FALSE(read_reference(b, 43, r.tol, back));
  std::istringstream c(os.str());
  CHECK_FALSE(read_reference(c, 42, 1e-3, back));
}
