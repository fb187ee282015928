#include "etlalm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace etlalm {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Composite: return "composite";
    case Variant::Smooth: return "smooth";
    case Variant::NonsmoothOnly: return "nonsmooth";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "composite") return Variant::Composite;
  if (s == "smooth") return Variant::Smooth;
  if (s == "nonsmooth" || s == "nonsmooth-only") return Variant::NonsmoothOnly;
  throw ConfigError("unknown variant '" + s + "'");
}

ConfigReport validate(const RunConfig& c) {
  if (!c.graph) throw ConfigError("run config has no graph");
  if (!c.objective) throw ConfigError("run config has no objective");
  const std::size_t n = c.graph->size();
  const std::size_t m = c.objective->dim();
  if (c.objective->agents() != n)
    throw ConfigError("objective has " + std::to_string(c.objective->agents()) +
                      " agents, graph has " + std::to_string(n));
  if (!is_connected(*c.graph)) throw ConfigError("communication graph is not connected");
  if (!(c.beta > 0.0)) throw ConfigError("beta must be positive");
  if (c.eta.size() != n) throw ConfigError("H needs one eta per agent");
  for (double e : c.eta)
    if (!(e > 0.0)) throw ConfigError("every eta_i must be positive");
  if (c.variant == Variant::Smooth && !c.objective->nonsmooth_is_zero())
    throw ConfigError("smooth variant requires g = 0");
  if (c.variant == Variant::NonsmoothOnly && !c.objective->smooth_is_zero())
    throw ConfigError("nonsmooth-only variant requires f = 0");
  for (const auto* init : {&c.x0, &c.z0})
    if (*init && ((*init)->rows() != n || (*init)->cols() != m))
      throw ConfigError("initial point has wrong shape");
  for (const auto& [agent, rule] : c.schedule.overrides())
    if (agent >= n) throw ConfigError("schedule override for nonexistent agent");

  ConfigReport report;
  Vec curvature = c.variant == Variant::NonsmoothOnly ? Vec(n, 0.0) : c.objective->lipschitz();
  report.stepsize = check_stepsize_composite(c.eta, c.beta, laplacian(*c.graph), curvature);
  if (!report.stepsize.ok) {
    const std::string msg = "stepsize condition fails: lambda_min(H - beta L" +
                            std::string(c.variant == Variant::NonsmoothOnly ? "" : " - L_f") +
                            ") = " + format_number(report.stepsize.margin);
    if (c.stepsize_policy == StepsizePolicy::Enforce) throw ConfigError(msg);
    report.warnings.push_back(msg);
  }
  return report;
}

NetworkState initial_state(const RunConfig& c) {
  const Graph& g = *c.graph;
  const std::size_t n = g.size();
  const std::size_t m = c.objective->dim();
  const Mat x0 = c.x0.value_or(Mat(n, m));
  const Mat z0 = c.z0.value_or(Mat(n, m));
  NetworkState s;
  s.agents.resize(n);
  s.last_broadcasts.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = s.agents[i];
    a.x.assign(x0.row(i).begin(), x0.row(i).end());
    a.z.assign(z0.row(i).begin(), z0.row(i).end());
    a.x_tilde = a.x;
    for (std::size_t j : g.neighbors(i))
      a.neighbor_tilde.push_back({j, Vec(x0.row(j).begin(), x0.row(j).end()), 0});
    a.broadcast_count = 1;
    s.log.push_back({0, i});
  }
  return s;
}

namespace {

Mat stack(const NetworkState& s, Vec AgentState::*field) {
  const std::size_t n = s.agents.size();
  const std::size_t m = n ? (s.agents[0].*field).size() : 0;
  Mat out(n, m);
  for (std::size_t i = 0; i < n; ++i)
    std::copy((s.agents[i].*field).begin(), (s.agents[i].*field).end(), out.row(i).begin());
  return out;
}

}  // namespace

Mat stacked_x(const NetworkState& s) { return stack(s, &AgentState::x); }
Mat stacked_z(const NetworkState& s) { return stack(s, &AgentState::z); }
Mat stacked_tilde(const NetworkState& s) { return stack(s, &AgentState::x_tilde); }

void laplacian_disagreement(const Graph& g, std::size_t i, const AgentState& agent,
                            std::span<double> out) {
  const auto& nbrs = g.neighbors(i);
  if (agent.neighbor_tilde.size() != nbrs.size())
    throw ProtocolError("agent " + std::to_string(i) + " holds " +
                        std::to_string(agent.neighbor_tilde.size()) + " neighbor copies, degree " +
                        std::to_string(nbrs.size()));
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    const NeighborCopy& copy = agent.neighbor_tilde[k];
    if (copy.id != nbrs[k])
      throw ProtocolError("agent " + std::to_string(i) + " is missing neighbor " +
                          std::to_string(nbrs[k]));
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += agent.x_tilde[c] - copy.value[c];
  }
}

Vec laplacian_disagreement(const Graph& g, std::size_t i, const Mat& tildes) {
  Vec out(tildes.cols(), 0.0);
  for (std::size_t j : g.neighbors(i))
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += tildes(i, c) - tildes(j, c);
  return out;
}

void primal_step_smooth(std::span<const double> x, std::span<const double> z,
                        std::span<const double> grad, std::span<const double> disagreement,
                        double eta, double beta, std::span<double> out) {
  for (std::size_t c = 0; c < x.size(); ++c)
    out[c] = x[c] - (z[c] + grad[c] + beta * disagreement[c]) / eta;
}

void primal_step_composite(std::span<const double> x, std::span<const double> z,
                           std::span<const double> grad, std::span<const double> disagreement,
                           double eta, double beta, const NonsmoothPart& g,
                           std::span<double> out) {
  Vec v(x.size());
  primal_step_smooth(x, z, grad, disagreement, eta, beta, v);
  g.prox(1.0 / eta, v, out);
}

void primal_step_nonsmooth(std::span<const double> x, std::span<const double> z,
                           std::span<const double> disagreement, double eta, double beta,
                           const NonsmoothPart& g, std::span<double> out) {
  Vec v(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) v[c] = x[c] - (z[c] + beta * disagreement[c]) / eta;
  g.prox(1.0 / eta, v, out);
}

void dual_step(std::span<const double> z, std::span<const double> disagreement, double beta,
               std::span<double> out) {
  for (std::size_t c = 0; c < z.size(); ++c) out[c] = z[c] + beta * disagreement[c];
}

namespace {

// Checked serially before each parallel phase so no worker ever throws.
void require_synced(const Graph& g, const AgentState& a, std::size_t i, std::size_t round,
                    const char* phase) {
  const auto& nbrs = g.neighbors(i);
  bool table_ok = a.neighbor_tilde.size() == nbrs.size();
  for (std::size_t k = 0; table_ok && k < nbrs.size(); ++k)
    table_ok = a.neighbor_tilde[k].id == nbrs[k];
  if (!table_ok)
    throw ProtocolError(std::string(phase) + " phase: neighbor table of agent " +
                        std::to_string(i) + " does not match the graph");
  for (const NeighborCopy& copy : a.neighbor_tilde)
    if (copy.synced_round != round)
      throw ProtocolError(std::string(phase) + " phase of round " + std::to_string(round) +
                          ": agent " + std::to_string(i) + " holds stale data from neighbor " +
                          std::to_string(copy.id) + " (synced at " +
                          std::to_string(copy.synced_round) + ")");
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

int thread_count(const RunConfig& c) {
#ifdef _OPENMP
  return c.threads > 0 ? c.threads : omp_get_max_threads();
#else
  (void)c;
  return 1;
#endif
}

}  // namespace

NetworkState run_round(NetworkState s, const RunConfig& config) {
  const Graph& g = *config.graph;
  const CompositeObjective& obj = *config.objective;
  const std::size_t n = g.size();
  const std::size_t m = obj.dim();
  const std::size_t k = s.round;
  const std::size_t next = k + 1;
  const double beta = config.beta;
  const auto ln = static_cast<long long>(n);
  const int nt = thread_count(config);

  for (std::size_t i = 0; i < n; ++i) require_synced(g, s.agents[i], i, k, "primal");

  Mat scratch_d(n, m), scratch_g(n, m), next_x(n, m);

  // Phase A: primal update from round-k quantities.
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long ii = 0; ii < ln; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    AgentState& a = s.agents[i];
    auto d = scratch_d.row(i);
    laplacian_disagreement(g, i, a, d);
    auto out = next_x.row(i);
    switch (config.variant) {
      case Variant::Smooth: {
        auto grad = scratch_g.row(i);
        obj.smooth(i).gradient(a.x, grad);
        primal_step_smooth(a.x, a.z, grad, d, config.eta[i], beta, out);
        break;
      }
      case Variant::Composite: {
        auto grad = scratch_g.row(i);
        obj.smooth(i).gradient(a.x, grad);
        primal_step_composite(a.x, a.z, grad, d, config.eta[i], beta, obj.nonsmooth(i), out);
        break;
      }
      case Variant::NonsmoothOnly:
        primal_step_nonsmooth(a.x, a.z, d, config.eta[i], beta, obj.nonsmooth(i), out);
        break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!all_finite(next_x.row(i))) throw DivergenceError(i, next);
    s.agents[i].x.assign(next_x.row(i).begin(), next_x.row(i).end());
  }

  // Phase B: trigger test, then delivery of x̃_{k+1} to neighbors.
  std::vector<std::uint8_t> fired(n, 0);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long ii = 0; ii < ln; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    AgentState& a = s.agents[i];
    const TriggerRule& rule = config.schedule.rule_for(i);
    bool send = false;
    if (const auto* periodic = std::get_if<EveryN>(&rule))
      send = periodic_broadcast(*periodic, next);
    else
      send = should_broadcast(a.x, a.x_tilde, threshold(config.schedule, i, next));
    if (send) {
      a.x_tilde = a.x;
      fired[i] = 1;
    }
  }
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long ii = 0; ii < ln; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (NeighborCopy& copy : s.agents[i].neighbor_tilde) {
      if (fired[copy.id]) copy.value = s.agents[copy.id].x_tilde;
      copy.synced_round = next;
    }
  }

  // Barrier passed: dual update over the round-(k+1) broadcast values.
  for (std::size_t i = 0; i < n; ++i) require_synced(g, s.agents[i], i, next, "dual");
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long ii = 0; ii < ln; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    AgentState& a = s.agents[i];
    auto d = scratch_d.row(i);
    laplacian_disagreement(g, i, a, d);
    dual_step(a.z, d, beta, a.z);
  }

  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = s.agents[i];
    if (!all_finite(a.z)) throw DivergenceError(i, next);
    if (fired[i]) {
      ++a.broadcast_count;
      s.log.push_back({next, i});
    } else if (!config.schedule.periodic(i)) {
      // holds by construction of the trigger rule
      const double e = threshold(config.schedule, i, next);
      if (!(vec::distance(a.x, a.x_tilde) <= e))
        throw ProtocolError("trigger bound violated at agent " + std::to_string(i));
    }
  }
  s.last_broadcasts = std::move(fired);
  s.round = next;
  return s;
}

std::pair<Mat, Mat> matrix_lalm_step(const Mat& x, const Mat& z, const CompositeObjective& obj,
                                     const SymmetricMatrix& lap, std::span<const double> eta,
                                     double beta, Variant variant) {
  const std::size_t n = x.rows(), m = x.cols();
  const Mat lx = lap.apply(x);
  Mat xn(n, m);
  Vec grad(m, 0.0), v(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (variant != Variant::NonsmoothOnly) obj.smooth(i).gradient(x.row(i), grad);
    for (std::size_t c = 0; c < m; ++c)
      v[c] = x(i, c) - (z(i, c) + grad[c] + beta * lx(i, c)) / eta[i];
    if (variant == Variant::Smooth)
      std::copy(v.begin(), v.end(), xn.row(i).begin());
    else
      obj.nonsmooth(i).prox(1.0 / eta[i], v, xn.row(i));
  }
  const Mat lxn = lap.apply(xn);
  Mat zn(n, m);
  for (std::size_t k = 0; k < n * m; ++k) zn.data()[k] = z.data()[k] + beta * lxn.data()[k];
  return {std::move(xn), std::move(zn)};
}

bool snapshot_round(const TraceOptions& opts, std::size_t agents, std::size_t dim,
                    std::size_t round) {
  switch (opts.snapshots) {
    case TraceOptions::Snapshots::EveryRound: return true;
    case TraceOptions::Snapshots::None: return false;
    case TraceOptions::Snapshots::Auto: return agents * dim <= 10000 || round % 10 == 0;
  }
  return false;
}

namespace {

void fill_diagnostics(RoundRecord& rec, const NetworkState& s, const RunConfig& config) {
  const std::size_t n = s.agents.size();
  const std::size_t m = n ? s.agents[0].z.size() : 0;
  double zmax = 0.0;
  Vec zsum(m, 0.0);
  for (const AgentState& a : s.agents) {
    zmax = std::max(zmax, vec::max_abs(a.z));
    for (std::size_t c = 0; c < m; ++c) zsum[c] += a.z[c];
  }
  rec.dual_imbalance = vec::max_abs(zsum);
  rec.dual_scale = static_cast<double>(n) * zmax;

  rec.trigger_slack = 0.0;
  if (s.round == 0) return;
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (config.schedule.periodic(i)) continue;
    const double e = threshold(config.schedule, i, s.round);
    const double dev = vec::distance(s.agents[i].x, s.agents[i].x_tilde);
    const double slack = e - dev;
    rec.trigger_slack = first ? slack : std::min(rec.trigger_slack, slack);
    first = false;
  }
}

}  // namespace

RunTrace run(const RunConfig& config, const TraceOptions& opts) {
  validate(config);
  const std::size_t n = config.graph->size();
  const std::size_t m = config.objective->dim();

  RunTrace trace;
  trace.agents = n;
  trace.dim = m;
  trace.config_echo = describe(config);

  NetworkState state = initial_state(config);
  Mat ergodic(n, m);

  auto record = [&](const Mat& x) {
    RoundRecord rec;
    rec.round = state.round;
    rec.broadcasts = state.last_broadcasts;
    if (snapshot_round(opts, n, m, state.round)) {
      rec.has_snapshot = true;
      rec.x = x;
      rec.ergodic_sum = ergodic;
      if (opts.keep_dual) rec.z = stacked_z(state);
    }
    fill_diagnostics(rec, state, config);
    trace.records.push_back(std::move(rec));
    if (opts.observer) opts.observer(state, x, ergodic);
  };

  record(stacked_x(state));
  for (std::size_t k = 0; k < config.rounds; ++k) {
    try {
      state = run_round(std::move(state), config);
    } catch (const DivergenceError& e) {
      trace.status = RunStatus::Diverged;
      trace.failure = e.what();
      break;
    }
    const Mat x = stacked_x(state);
    for (std::size_t t = 0; t < n * m; ++t) ergodic.data()[t] += x.data()[t];
    record(x);
  }
  trace.final_state = std::move(state);
  return trace;
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << "agents " << c.graph->size() << " edges " << c.graph->edge_count() << " dim "
     << c.objective->dim() << " variant " << to_string(c.variant) << " schedule "
     << to_string(c.schedule) << " beta " << format_number(c.beta) << " eta";
  const bool uniform = std::all_of(c.eta.begin(), c.eta.end(),
                                   [&](double e) { return e == c.eta.front(); });
  if (uniform && !c.eta.empty())
    os << ' ' << format_number(c.eta.front());
  else
    for (double e : c.eta) os << ' ' << format_number(e);
  os << " rounds " << c.rounds << " seed " << c.seed;
  return os.str();
}

}  // namespace etlalm
