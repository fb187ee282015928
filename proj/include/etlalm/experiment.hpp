#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "etlalm/config.hpp"
#include "etlalm/engine.hpp"
#include "etlalm/metrics.hpp"
#include "etlalm/reference.hpp"

namespace etlalm {

/// Everything one seed of a sweep shares across schedules.
struct SeedSetup {
  std::uint64_t seed = 0;
  std::shared_ptr<const ProblemInstance> instance;
  std::shared_ptr<const Graph> graph;
  ReferenceSolution reference;
  bool reference_from_cache = false;
  double beta = 0.0;
  Vec eta;
};

/// Builds instance, graph and reference for one seed. With a cache directory the
/// instance and reference are stored there and reused when the key matches.
SeedSetup prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// β = 1/(λmax(L)+1); η_i = 1 + l_i, or 1 + l_i²/μmin when every agent is strongly convex.
double default_beta(const Graph& g);
Vec default_eta(const CompositeObjective& obj);

RunConfig make_run_config(const ExperimentConfig& cfg, const SeedSetup& setup,
                          const std::string& schedule);

/// One CSV row per round; metrics evaluated online.
struct TraceRow {
  std::size_t round = 0;
  double objective_gap = 0.0;    // at x̂_t (x_0 for t = 0)
  double consensus_error = 0.0;  // at x̂_t
  double primal_residual = 0.0;  // at x_t
  std::size_t broadcasts_agent0 = 0;
  std::size_t broadcasts_total = 0;
  bool finite = true;
};

struct ScheduleRun {
  std::string schedule;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::Completed;
  std::string failure;
  std::vector<TraceRow> rows;
  bool residual_relative = true;  // false: absolute ||x_k - 1⊗x*|| (x_0 = 1⊗x*)
  ConfigReport report;
  std::optional<StepsizeCheck> strongly_convex_check;
  std::optional<Theorem1Certificate> certificate;
  std::string certificate_error;
  std::size_t certificate_violations = 0;
  std::size_t certificate_checked = 0;
  double wall_seconds = 0.0;
};

/// Runs one schedule and evaluates its metrics round by round. `extra` sees
/// every round after the metrics are recorded.
ScheduleRun run_schedule(const ExperimentConfig& cfg, const SeedSetup& setup,
                         const std::string& schedule, const RoundObserver& extra = {});

inline constexpr const char* kTraceHeader =
    "round,objective_gap,consensus_error,primal_residual,broadcasts_agent0,broadcasts_total_cum";

/// CSV text; a diverged run ends with "k,DIVERGED,,,,".
std::string trace_csv(const ScheduleRun& run);
std::string summary_text(const ExperimentConfig& cfg, const SeedSetup& setup,
                         const ScheduleRun& run);

/// Directory-safe name for a schedule string.
std::string schedule_tag(const std::string& schedule);

/// Error series and agent-0 cumulative broadcasts for one schedule.
struct ScheduleSeries {
  std::string label;
  bool is_zero = false;
  std::vector<double> error;
  std::vector<std::size_t> agent0_broadcasts;
};

struct ComparisonRow {
  std::string label;
  std::vector<std::optional<std::size_t>> broadcasts;  // first round reaching each threshold
  std::vector<std::optional<double>> ratio_to_zero;
};

struct ComparisonTable {
  std::vector<double> thresholds;
  std::vector<ComparisonRow> rows;
};

/// Agent-0 broadcasts needed before the error first drops to each threshold,
/// and the ratio against the Zero schedule. Series index k is round k; round 0 is
/// skipped. Unreached thresholds stay empty.
ComparisonTable compare_schedules(const std::vector<ScheduleSeries>& series,
                                  const std::vector<double>& thresholds = {1e-1, 1e-2, 1e-3,
                                                                           1e-4});
std::string render(const ComparisonTable& table);

/// Error metric used for comparisons: objective gap for lasso, primal residual otherwise.
ScheduleSeries series_of(const ExperimentConfig& cfg, const ScheduleRun& run);

struct ExperimentResult {
  std::vector<ScheduleRun> runs;
  std::vector<std::string> diverged;  // "schedule seed s: reason"
  std::optional<ComparisonTable> comparison;
  int exit_code() const { return diverged.empty() ? 0 : 1; }
};

/// Full sweep over seeds and schedules, writing artifacts under cfg.out.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace etlalm
