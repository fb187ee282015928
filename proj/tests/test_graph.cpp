#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <sstream>

#include "etlalm/graph.hpp"
#include "support.hpp"

using namespace etlalm;
using testing_support::to_eigen;

TEST_CASE("random graph edge counts") {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const Graph g = generate_random_graph(100, 0.4, seed);
    CHECK(g.edge_count() == 1980);
    CHECK(is_connected(g));
  }
  CHECK(generate_random_graph(3, 1.0, 5).edge_count() == 3);
  const Graph two = generate_random_graph(2, 1.0, 5);
  CHECK(two.edge_count() == 1);
  CHECK(is_connected(two));
}

TEST_CASE("random graph is seed-deterministic") {
  CHECK(generate_random_graph(30, 0.2, 7) == generate_random_graph(30, 0.2, 7));
  CHECK_FALSE(generate_random_graph(30, 0.2, 7) == generate_random_graph(30, 0.2, 8));
}

TEST_CASE("random graph rejects infeasible ratios") {
  CHECK_THROWS_AS(generate_random_graph(10, 0.1, 1), ConfigError);  // 5 edges < 9
  CHECK_THROWS_AS(generate_random_graph(10, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(generate_random_graph(10, 1.5, 1), ConfigError);
  CHECK_THROWS_AS(generate_random_graph(1, 1.0, 1), ConfigError);
}

TEST_CASE("graph construction errors") {
  CHECK_THROWS_AS(Graph(3, {{0, 0}}), ConfigError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), ConfigError);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), ConfigError);
}

TEST_CASE("Laplacian examples") {
  const SymmetricMatrix p = laplacian(path_graph(3));
  const double expected[3][3] = {{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(p(i, j) == expected[i][j]);
  const SymmetricMatrix t = laplacian(complete_graph(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(t(i, j) == (i == j ? 2.0 : -1.0));
  const SymmetricMatrix one = laplacian(Graph(1));
  CHECK(one.size() == 1);
  CHECK(one(0, 0) == 0.0);
}

TEST_CASE("connectivity") {
  CHECK(is_connected(path_graph(5)));
  CHECK(is_connected(Graph(1)));
  CHECK_FALSE(is_connected(Graph(4, {{0, 1}, {2, 3}})));
}

TEST_CASE("second Laplacian eigenvalue is positive iff connected") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 8;
    std::vector<Graph::Edge> edges;
    std::bernoulli_distribution keep(0.3);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (keep(rng)) edges.emplace_back(i, j);
    const Graph g(n, edges);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(laplacian(g).dense()));
    CHECK(is_connected(g) == (oracle.eigenvalues()(1) > 1e-9));
  }
}

TEST_CASE("edge list round trip") {
  const Graph g = generate_random_graph(25, 0.3, 4);
  std::istringstream in(to_edge_list(g));
  CHECK(read_edge_list(in) == g);
  std::istringstream bad("3 2\n0 1\n");
  CHECK_THROWS_AS(read_edge_list(bad), ConfigError);
}

TEST_CASE("composite stepsize check") {
  const SymmetricMatrix lap = laplacian(complete_graph(3));
  const Vec ones(3, 1.0), zeros(3, 0.0);
  const StepsizeCheck ok = check_stepsize_composite(Vec(3, 1.5), 0.1, lap, ones);
  CHECK(ok.ok);
  CHECK(ok.margin == doctest::Approx(0.2).epsilon(1e-9));
  const StepsizeCheck bad = check_stepsize_composite(Vec(3, 1.0), 0.1, lap, ones);
  CHECK_FALSE(bad.ok);
  CHECK(bad.margin == doctest::Approx(-0.3).epsilon(1e-9));
  const StepsizeCheck trivial = check_stepsize_composite(ones, 0.0, lap, zeros);
  CHECK(trivial.ok);
  CHECK(trivial.margin == doctest::Approx(1.0));
}

TEST_CASE("strongly convex stepsize check") {
  const SymmetricMatrix lap = laplacian(complete_graph(3));
  const Vec ones(3, 1.0);
  const StepsizeCheck ok = check_stepsize_strongly_convex(Vec(3, 2.0), 0.1, lap, ones, ones, 1.0);
  CHECK(ok.ok);
  CHECK(ok.margin == doctest::Approx(0.7).epsilon(1e-9));
  CHECK_FALSE(check_stepsize_strongly_convex(ones, 0.1, lap, ones, ones, 1.0).ok);
  CHECK_THROWS_AS(check_stepsize_strongly_convex(ones, 0.1, lap, ones, ones, 2.0), ConfigError);
  CHECK_THROWS_AS(check_stepsize_strongly_convex(ones, 0.1, lap, ones, ones, 0.0), ConfigError);
}
