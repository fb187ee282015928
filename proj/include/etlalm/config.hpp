#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etlalm/engine.hpp"
#include "etlalm/objective.hpp"

namespace etlalm {

/// Experiment description. Defaults reproduce the l1-l2 case-study layout:
/// n=100, p_i=3, m=50, r=0.4, H=0.6I, β=0.0025, schedule poly:20:1.2.
/// Choosing problem=logistic or problem=quadratic swaps in that problem's
/// defaults for every key not set explicitly.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Lasso;
  std::size_t agents = 100;
  std::size_t dim = 50;
  std::size_t rows = 3;  // p_i or m_i
  double tau = 0.1;
  double ridge = 0.0;
  double graph_r = 0.4;
  std::optional<std::uint64_t> graph_seed;  // defaults to the run seed
  std::optional<double> beta = 0.0025;      // nullopt: 1/(λmax(L)+1)
  Vec eta = {0.6};                          // one value, one per agent, or empty: I + L_f
  Variant variant = Variant::Composite;
  std::vector<std::string> schedules = {"poly:20:1.2"};
  std::size_t rounds = 2000;
  std::vector<std::uint64_t> seeds = {1};
  std::string out = "runs";
  double reference_tol = 1e-10;
  bool certificate = false;
  std::optional<double> rho;  // nullopt: 2||y*||
  bool compare = false;
  StepsizePolicy stepsize_policy = StepsizePolicy::WarnOnly;
  int threads = 0;

  std::set<std::string> explicit_keys;
};

/// Recognized keys, in documentation order.
const std::vector<std::string>& config_keys();

/// Applies one `key = value` setting. `origin` names the line or flag for errors.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   const std::string& origin);

/// Fills problem-dependent defaults for keys not set explicitly, then validates.
void finalize(ExperimentConfig& cfg);

/// Flat `key = value` text, '#' comments. Unknown keys are rejected with the line number.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<text>");
ExperimentConfig parse_config_file(const std::string& path);

/// Flat key-value dump of the effective configuration.
std::string to_text(const ExperimentConfig& cfg);

}  // namespace etlalm
