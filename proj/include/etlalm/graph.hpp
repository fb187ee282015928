#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "etlalm/linalg.hpp"

namespace etlalm {

/// Simple undirected graph. Neighbor lists are kept sorted ascending; every
/// per-agent reduction in the engine walks them in that order.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}
  /// Throws ConfigError on self-loops, duplicates, or out-of-range endpoints.
  Graph(std::size_t n, const std::vector<Edge>& edges);

  std::size_t size() const { return adj_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t degree(std::size_t i) const { return adj_[i].size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adj_[i]; }
  bool has_edge(std::size_t i, std::size_t j) const;

  /// Edges (i, j) with i < j, lexicographic order.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::vector<std::size_t>> adj_;
  std::size_t edge_count_ = 0;
};

/// round(r * n(n-1)/2)
std::size_t target_edge_count(std::size_t n, double r);

/// Uniform sample of exactly target_edge_count(n, r) edges, resampled with a
/// fresh sub-seed until connected (at most 1000 attempts).
Graph generate_random_graph(std::size_t n, double r, std::uint64_t seed);

Graph path_graph(std::size_t n);
Graph complete_graph(std::size_t n);

bool is_connected(const Graph& g);

/// L = D - A, built in integers and cast.
SymmetricMatrix laplacian(const Graph& g);

struct StepsizeCheck {
  bool ok = false;
  double margin = 0.0;
};

/// λ_min(H - βL - L_f) > 0, the composite-objective rate condition.
StepsizeCheck check_stepsize_composite(std::span<const double> eta, double beta,
                                       const SymmetricMatrix& lap,
                                       std::span<const double> lipschitz);

/// λ_min(H - βL - L_f²/k1) > 0 with 0 < k1 < 2 min μ; also requires 2M - k1 I ≻ 0.
StepsizeCheck check_stepsize_strongly_convex(std::span<const double> eta, double beta,
                                             const SymmetricMatrix& lap,
                                             std::span<const double> lipschitz,
                                             std::span<const double> strong_convexity,
                                             double k1);

/// "n m" then m lines "i j", 0-based.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);
std::string to_edge_list(const Graph& g);

}  // namespace etlalm
