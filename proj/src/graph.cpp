#include "etlalm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace etlalm {

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : adj_(n) {
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) throw ConfigError("edge endpoint out of range");
    if (i == j) throw ConfigError("self-loop on node " + std::to_string(i));
    if (has_edge(i, j))
      throw ConfigError("duplicate edge " + std::to_string(i) + "-" + std::to_string(j));
    adj_[i].insert(std::lower_bound(adj_[i].begin(), adj_[i].end(), j), j);
    adj_[j].insert(std::lower_bound(adj_[j].begin(), adj_[j].end(), i), i);
    ++edge_count_;
  }
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  return std::binary_search(adj_[i].begin(), adj_[i].end(), j);
}

std::vector<Graph::Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < adj_.size(); ++i)
    for (std::size_t j : adj_[i])
      if (i < j) out.emplace_back(i, j);
  return out;
}

std::size_t target_edge_count(std::size_t n, double r) {
  const double all = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<std::size_t>(std::llround(r * all));
}

Graph generate_random_graph(std::size_t n, double r, std::uint64_t seed) {
  if (n < 2) throw ConfigError("random graph needs n >= 2");
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("connectivity ratio must lie in (0, 1]");
  const std::size_t target = target_edge_count(n, r);
  if (target < n - 1)
    throw ConfigError("connectivity ratio " + std::to_string(r) + " gives " +
                      std::to_string(target) + " edges, fewer than n-1 = " +
                      std::to_string(n - 1));

  std::vector<Graph::Edge> all;
  all.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);

  constexpr std::uint64_t kMaxAttempts = 1000;
  for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::vector<Graph::Edge> pool = all;
    // partial Fisher-Yates: the first `target` entries are a uniform subset
    for (std::size_t k = 0; k < target; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    pool.resize(target);
    std::sort(pool.begin(), pool.end());
    Graph g(n, pool);
    if (is_connected(g)) return g;
  }
  throw ConfigError("no connected graph found in 1000 attempts (n=" + std::to_string(n) +
                    ", r=" + std::to_string(r) + ")");
}

Graph path_graph(std::size_t n) {
  std::vector<Graph::Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph complete_graph(std::size_t n) {
  std::vector<Graph::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.size();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : g.neighbors(u))
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        queue.push_back(v);
      }
  }
  return reached == n;
}

SymmetricMatrix laplacian(const Graph& g) {
  const std::size_t n = g.size();
  std::vector<long long> entries(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i * n + i] = static_cast<long long>(g.degree(i));
    for (std::size_t j : g.neighbors(i)) entries[i * n + j] = -1;
  }
  Mat l(n, n);
  for (std::size_t k = 0; k < n * n; ++k) l.data()[k] = static_cast<double>(entries[k]);
  return SymmetricMatrix(std::move(l));
}

namespace {

SymmetricMatrix stepsize_matrix(std::span<const double> eta, double beta,
                                const SymmetricMatrix& lap, std::span<const double> curvature) {
  const std::size_t n = lap.size();
  if (eta.size() != n || curvature.size() != n)
    throw ConfigError("stepsize check: dimension mismatch");
  Mat p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = -beta * lap(i, j);
      if (i == j) v += eta[i] - curvature[i];
      p(i, j) = v;
    }
  return SymmetricMatrix(std::move(p));
}

}  // namespace

StepsizeCheck check_stepsize_composite(std::span<const double> eta, double beta,
                                       const SymmetricMatrix& lap,
                                       std::span<const double> lipschitz) {
  for (double e : eta)
    if (!(e > 0.0)) throw ConfigError("eta_i must be positive");
  if (beta < 0.0) throw ConfigError("beta must be nonnegative");
  const double margin = min_eigenvalue(stepsize_matrix(eta, beta, lap, lipschitz), 1e-12);
  return {margin > 0.0, margin};
}

StepsizeCheck check_stepsize_strongly_convex(std::span<const double> eta, double beta,
                                             const SymmetricMatrix& lap,
                                             std::span<const double> lipschitz,
                                             std::span<const double> strong_convexity,
                                             double k1) {
  if (strong_convexity.empty()) throw ConfigError("no strong-convexity moduli given");
  const double mu_min = *std::min_element(strong_convexity.begin(), strong_convexity.end());
  if (!(k1 > 0.0 && k1 < 2.0 * mu_min))
    throw ConfigError("k1 must lie in (0, 2*min mu) = (0, " + std::to_string(2.0 * mu_min) + ")");
  // Q = 2M - k1 I; positive by the range check, asserted from its entries.
  for (double mu : strong_convexity)
    if (!(2.0 * mu - k1 > 0.0)) throw ConfigError("Q = 2M - k1 I is not positive definite");

  Vec curvature(lipschitz.size());
  for (std::size_t i = 0; i < lipschitz.size(); ++i)
    curvature[i] = lipschitz[i] * lipschitz[i] / k1;
  const double margin = min_eigenvalue(stepsize_matrix(eta, beta, lap, curvature), 1e-12);
  return {margin > 0.0, margin};
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.size() << ' ' << g.edge_count() << '\n';
  for (auto [i, j] : g.edges()) os << i << ' ' << j << '\n';
}

Graph read_edge_list(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw ConfigError("edge list: missing 'n m' header");
  std::vector<Graph::Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t i = 0, j = 0;
    if (!(is >> i >> j))
      throw ConfigError("edge list: expected " + std::to_string(m) + " edges, got " +
                        std::to_string(k));
    edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  return Graph(n, edges);
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

}  // namespace etlalm
