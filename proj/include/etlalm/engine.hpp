#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "etlalm/graph.hpp"
#include "etlalm/objective.hpp"
#include "etlalm/trigger.hpp"

namespace etlalm {

enum class Variant { Composite, Smooth, NonsmoothOnly };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

enum class StepsizePolicy { Enforce, WarnOnly };

struct RunConfig {
  std::shared_ptr<const Graph> graph;
  std::shared_ptr<const CompositeObjective> objective;
  TriggerSchedule schedule;
  double beta = 0.0;
  Vec eta;  // H = diag(eta)
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  Variant variant = Variant::Composite;
  std::optional<Mat> x0;  // zero when absent
  std::optional<Mat> z0;  // zero when absent
  StepsizePolicy stepsize_policy = StepsizePolicy::Enforce;
  int threads = 0;  // 0: OpenMP default
};

struct ConfigReport {
  StepsizeCheck stepsize;
  std::vector<std::string> warnings;
};

/// Checks shapes, positivity, variant/objective consistency, connectivity and
/// the stepsize condition for the variant's regime (nonsmooth-only: H - βL ≻ 0,
/// otherwise H - βL - L_f ≻ 0). Throws ConfigError; under WarnOnly a failed
/// stepsize check becomes a warning.
ConfigReport validate(const RunConfig& config);

struct NeighborCopy {
  std::size_t id = 0;
  Vec value;                  // last x̃_j received
  std::size_t synced_round = 0;
};

struct AgentState {
  Vec x;        // x_{i,k}
  Vec z;        // z_{i,k}
  Vec x_tilde;  // x̃_{i,k}
  std::vector<NeighborCopy> neighbor_tilde;  // ascending neighbor id
  std::size_t broadcast_count = 0;
};

struct BroadcastRecord {
  std::size_t round = 0;
  std::size_t agent = 0;
  friend bool operator==(const BroadcastRecord&, const BroadcastRecord&) = default;
};

struct NetworkState {
  std::vector<AgentState> agents;
  std::size_t round = 0;
  std::vector<BroadcastRecord> log;
  std::vector<std::uint8_t> last_broadcasts;  // per agent, for the latest round
};

/// State at round 0: x = x0, z = z0, every agent has broadcast x0 to its neighbors.
NetworkState initial_state(const RunConfig& config);

Mat stacked_x(const NetworkState& s);
Mat stacked_z(const NetworkState& s);
Mat stacked_tilde(const NetworkState& s);

/// Σ_{j∈N_i} (x̃_i - x̃_j), summed in ascending j. Throws ProtocolError when the
/// agent's neighbor table does not match the graph.
void laplacian_disagreement(const Graph& g, std::size_t i, const AgentState& agent,
                            std::span<double> out);
/// Same sum over a stacked matrix of broadcast values.
Vec laplacian_disagreement(const Graph& g, std::size_t i, const Mat& tildes);

/// prox_{g/η}(x - (z + ∇f(x) + β·d)/η)
void primal_step_composite(std::span<const double> x, std::span<const double> z,
                           std::span<const double> grad, std::span<const double> disagreement,
                           double eta, double beta, const NonsmoothPart& g,
                           std::span<double> out);
/// x - (z + ∇f(x) + β·d)/η
void primal_step_smooth(std::span<const double> x, std::span<const double> z,
                        std::span<const double> grad, std::span<const double> disagreement,
                        double eta, double beta, std::span<double> out);
/// prox_{g/η}(x - (z + β·d)/η)
void primal_step_nonsmooth(std::span<const double> x, std::span<const double> z,
                           std::span<const double> disagreement, double eta, double beta,
                           const NonsmoothPart& g, std::span<double> out);
/// z + β·d, with d taken over the round-(k+1) broadcast values.
void dual_step(std::span<const double> z, std::span<const double> disagreement, double beta,
               std::span<double> out);

/// One synchronous round: primal phase, trigger + delivery phase, barrier, dual phase.
/// Throws DivergenceError on a non-finite iterate and ProtocolError on phase violations.
NetworkState run_round(NetworkState state, const RunConfig& config);

/// Stacked periodic iteration (no triggering), evaluated serially:
/// x⁺_i = prox_{g_i/η_i}(x_i - (z_i + ∇f_i(x_i) + β(Lx)_i)/η_i), z⁺ = z + βLx⁺.
std::pair<Mat, Mat> matrix_lalm_step(const Mat& x, const Mat& z, const CompositeObjective& obj,
                                     const SymmetricMatrix& lap, std::span<const double> eta,
                                     double beta, Variant variant = Variant::Composite);

struct RoundRecord {
  std::size_t round = 0;
  bool has_snapshot = false;
  Mat x;              // x_k (when has_snapshot)
  Mat ergodic_sum;    // Σ_{j=1}^{k} x_j (when has_snapshot)
  Mat z;              // only when TraceOptions::keep_dual
  std::vector<std::uint8_t> broadcasts;  // per agent, this round
  double trigger_slack = 0.0;   // min_i E_{i,k} - ||x_i - x̃_i|| over event-triggered agents
  double dual_imbalance = 0.0;  // max over coordinates of |Σ_i z_i|
  double dual_scale = 0.0;      // n · max_i ||z_i||_∞
};

enum class RunStatus { Completed, Diverged };

struct RunTrace {
  std::size_t agents = 0;
  std::size_t dim = 0;
  std::vector<RoundRecord> records;  // rounds + 1 on completion
  NetworkState final_state;
  RunStatus status = RunStatus::Completed;
  std::string failure;
  std::uint64_t instance_hash = 0;
  std::string config_echo;
};

using RoundObserver =
    std::function<void(const NetworkState& state, const Mat& x, const Mat& ergodic_sum)>;

struct TraceOptions {
  enum class Snapshots { Auto, EveryRound, None };
  Snapshots snapshots = Snapshots::Auto;
  bool keep_dual = false;
  RoundObserver observer;  // called after round 0 and after every round
};

/// Rounds with full snapshots under the Auto policy: every round when n·m <= 1e4,
/// else every 10th.
bool snapshot_round(const TraceOptions& opts, std::size_t agents, std::size_t dim,
                    std::size_t round);

/// Validates, then loops run_round. Divergence ends the run with a partial trace
/// marked Diverged.
RunTrace run(const RunConfig& config, const TraceOptions& opts = {});

std::string describe(const RunConfig& config);

}  // namespace etlalm
