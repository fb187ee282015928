#include "etlalm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace etlalm {

namespace fs = std::filesystem;

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

ProblemInstance generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.problem) {
    case ProblemKind::Lasso:
      return make_lasso_instance(cfg.agents, cfg.rows, cfg.dim, cfg.tau, seed);
    case ProblemKind::Logistic:
      return make_logistic_instance(cfg.agents, cfg.rows, cfg.dim, seed, cfg.ridge);
    case ProblemKind::Quadratic:
      return make_quadratic_instance(cfg.agents, cfg.dim, seed);
  }
  throw ConfigError("unknown problem kind");
}

bool strongly_convex(const CompositeObjective& obj) {
  const Vec mu = obj.strong_convexity();
  return !mu.empty() && *std::min_element(mu.begin(), mu.end()) > 0.0;
}

std::string number_or_dash(const std::optional<double>& v) {
  if (!v) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

double default_beta(const Graph& g) { return 1.0 / (max_eigenvalue(laplacian(g), 1e-12) + 1.0); }

Vec default_eta(const CompositeObjective& obj) {
  const Vec l = obj.lipschitz();
  Vec eta(l.size());
  if (strongly_convex(obj)) {
    const Vec mu = obj.strong_convexity();
    const double k1 = *std::min_element(mu.begin(), mu.end());
    for (std::size_t i = 0; i < l.size(); ++i) eta[i] = 1.0 + l[i] * l[i] / k1;
  } else {
    for (std::size_t i = 0; i < l.size(); ++i) eta[i] = 1.0 + l[i];
  }
  return eta;
}

SeedSetup prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::optional<fs::path>& cache_dir) {
  SeedSetup s;
  s.seed = seed;
  auto inst = std::make_shared<ProblemInstance>(generate(cfg, seed));
  const std::uint64_t hash = instance_hash(*inst);
  s.graph = std::make_shared<Graph>(
      generate_random_graph(cfg.agents, cfg.graph_r, cfg.graph_seed.value_or(seed)));

  if (cache_dir) {
    const fs::path inst_path = *cache_dir / ("instance_" + hex(hash) + ".txt");
    if (!fs::exists(inst_path)) write_file(inst_path, to_text(*inst));
    const fs::path ref_path =
        *cache_dir / ("reference_" + hex(hash) + "_" + format_number(cfg.reference_tol) + ".txt");
    std::ifstream in(ref_path);
    if (in && read_reference(in, hash, cfg.reference_tol, s.reference)) {
      s.reference_from_cache = true;
    } else {
      s.reference = solve_centralized(inst->objective, cfg.reference_tol);
      std::ostringstream os;
      write_reference(os, s.reference, hash);
      write_file(ref_path, os.str());
    }
  } else {
    s.reference = solve_centralized(inst->objective, cfg.reference_tol);
  }
  s.instance = std::move(inst);

  s.beta = cfg.beta ? *cfg.beta : default_beta(*s.graph);
  if (cfg.eta.empty())
    s.eta = default_eta(s.instance->objective);
  else if (cfg.eta.size() == 1)
    s.eta.assign(cfg.agents, cfg.eta.front());
  else
    s.eta = cfg.eta;
  return s;
}

RunConfig make_run_config(const ExperimentConfig& cfg, const SeedSetup& setup,
                          const std::string& schedule) {
  RunConfig rc;
  rc.graph = setup.graph;
  rc.objective = std::shared_ptr<const CompositeObjective>(setup.instance, &setup.instance->objective);
  rc.schedule = parse_schedule(schedule);
  rc.beta = setup.beta;
  rc.eta = setup.eta;
  rc.rounds = cfg.rounds;
  rc.seed = setup.seed;
  rc.variant = cfg.variant;
  rc.stepsize_policy = cfg.stepsize_policy;
  rc.threads = cfg.threads;
  return rc;
}

ScheduleRun run_schedule(const ExperimentConfig& cfg, const SeedSetup& setup,
                         const std::string& schedule, const RoundObserver& extra) {
  ScheduleRun out;
  out.schedule = schedule;
  out.seed = setup.seed;
  const RunConfig rc = make_run_config(cfg, setup, schedule);
  out.report = validate(rc);

  const CompositeObjective& obj = *rc.objective;
  const SymmetricMatrix lap = laplacian(*rc.graph);
  const std::size_t n = rc.graph->size(), m = obj.dim();
  const Vec& x_star = setup.reference.x_star;

  if (strongly_convex(obj)) {
    const Vec mu = obj.strong_convexity();
    out.strongly_convex_check = check_stepsize_strongly_convex(
        rc.eta, rc.beta, lap, obj.lipschitz(), mu, *std::min_element(mu.begin(), mu.end()));
  }

  if (cfg.certificate) {
    try {
      if (n > kCertificateMaxAgents)
        throw ConfigError("certificate supports at most 64 agents");
      double rho = 0.0;
      if (cfg.rho) {
        rho = *cfg.rho;
      } else {
        const double y = vec::norm(least_norm_dual(lap, recover_dual(obj, x_star)).data());
        rho = y > 0.0 ? 2.0 * y : 1.0;
      }
      out.certificate = make_theorem1_certificate(rc, setup.reference, rho);
    } catch (const ConfigError& e) {
      out.certificate_error = e.what();
    }
  }

  const Mat x0 = rc.x0 ? *rc.x0 : Mat(n, m);
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < m; ++c) den += (x0(i, c) - x_star[c]) * (x0(i, c) - x_star[c]);
  out.residual_relative = den > 0.0;

  std::size_t agent0 = 0, total = 0;
  Mat x_hat(n, m);
  TraceOptions opts;
  opts.snapshots = TraceOptions::Snapshots::None;
  opts.observer = [&](const NetworkState& state, const Mat& x, const Mat& ergodic_sum) {
    TraceRow row;
    row.round = state.round;
    for (std::size_t i = 0; i < n; ++i) total += state.last_broadcasts[i];
    agent0 += state.last_broadcasts[0];
    row.broadcasts_agent0 = agent0;
    row.broadcasts_total = total;
    if (state.round == 0) {
      x_hat = x;
    } else {
      const double inv = 1.0 / static_cast<double>(state.round);
      for (std::size_t t = 0; t < n * m; ++t) x_hat.data()[t] = ergodic_sum.data()[t] * inv;
    }
    row.objective_gap = objective_gap(obj, x_hat, setup.reference.f_star);
    row.consensus_error = consensus_error(lap, x_hat);
    row.primal_residual = out.residual_relative
                              ? primal_residual(x, x0, x_star)
                              : vec::distance(x.data(), replicate(x_star, n).data());
    row.finite = std::isfinite(row.objective_gap) && std::isfinite(row.consensus_error) &&
                 std::isfinite(row.primal_residual);
    if (out.certificate && state.round >= 1 && row.finite) {
      const CertificateVerdict v = check_certificate(*out.certificate, lap, obj,
                                                     setup.reference.f_star, x_hat, state.round);
      ++out.certificate_checked;
      if (!v.consensus_ok || !v.objective_ok) ++out.certificate_violations;
    }
    out.rows.push_back(row);
    if (extra) extra(state, x, ergodic_sum);
  };

  const auto start = std::chrono::steady_clock::now();
  RunTrace trace = run(rc, opts);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.status = trace.status;
  out.failure = trace.failure;

  // Metrics can overflow before an iterate does; treat that as divergence too.
  const auto bad = std::find_if(out.rows.begin(), out.rows.end(),
                                [](const TraceRow& r) { return !r.finite; });
  if (bad != out.rows.end()) {
    if (out.status != RunStatus::Diverged)
      out.failure = "non-finite metric at round " + std::to_string(bad->round);
    out.status = RunStatus::Diverged;
    out.rows.erase(bad, out.rows.end());
  }
  return out;
}

std::string trace_csv(const ScheduleRun& run) {
  std::ostringstream os;
  os << kTraceHeader << '\n';
  for (const TraceRow& r : run.rows)
    os << r.round << ',' << format_number(r.objective_gap) << ','
       << format_number(r.consensus_error) << ',' << format_number(r.primal_residual) << ','
       << r.broadcasts_agent0 << ',' << r.broadcasts_total << '\n';
  if (run.status == RunStatus::Diverged) os << run.rows.size() << ",DIVERGED,,,,\n";
  return os.str();
}

std::string summary_text(const ExperimentConfig& cfg, const SeedSetup& setup,
                         const ScheduleRun& run) {
  std::ostringstream os;
  const CompositeObjective& obj = setup.instance->objective;
  const std::size_t rounds_done = run.rows.empty() ? 0 : run.rows.back().round;
  os << "problem = " << to_string(cfg.problem) << '\n'
     << "schedule = " << run.schedule << '\n'
     << "seed = " << run.seed << '\n'
     << "instance_hash = " << hex(instance_hash(*setup.instance)) << '\n'
     << "agents = " << setup.graph->size() << '\n'
     << "edges = " << setup.graph->edge_count() << '\n'
     << "dim = " << obj.dim() << '\n'
     << "variant = " << to_string(cfg.variant) << '\n'
     << "beta = " << format_number(setup.beta) << '\n'
     << "eta_min = " << format_number(*std::min_element(setup.eta.begin(), setup.eta.end()))
     << '\n'
     << "eta_max = " << format_number(*std::max_element(setup.eta.begin(), setup.eta.end()))
     << '\n'
     << "stepsize_margin = " << format_number(run.report.stepsize.margin) << '\n'
     << "stepsize_ok = " << (run.report.stepsize.ok ? "true" : "false") << '\n';
  if (run.strongly_convex_check)
    os << "stepsize_margin_strongly_convex = " << format_number(run.strongly_convex_check->margin)
       << '\n'
       << "stepsize_ok_strongly_convex = " << (run.strongly_convex_check->ok ? "true" : "false")
       << '\n';
  for (const std::string& w : run.report.warnings) os << "warning = " << w << '\n';
  os << "reference_f_star = " << format_number(setup.reference.f_star) << '\n'
     << "reference_residual = " << format_number(setup.reference.solver_residual) << '\n'
     << "reference_certified = " << (setup.reference.certified ? "true" : "false") << '\n'
     << "reference_cached = " << (setup.reference_from_cache ? "true" : "false") << '\n'
     << "status = " << (run.status == RunStatus::Completed ? "completed" : "diverged") << '\n';
  if (!run.failure.empty()) os << "failure = " << run.failure << '\n';
  os << "rounds_completed = " << rounds_done << '\n';
  if (!run.rows.empty()) {
    const TraceRow& last = run.rows.back();
    os << "final_objective_gap = " << format_number(last.objective_gap) << '\n'
       << "final_consensus_error = " << format_number(last.consensus_error) << '\n'
       << "final_primal_residual = " << format_number(last.primal_residual) << '\n'
       << "primal_residual_mode = " << (run.residual_relative ? "relative" : "absolute") << '\n'
       << "broadcasts_agent0 = " << last.broadcasts_agent0 << '\n'
       << "broadcasts_total = " << last.broadcasts_total << '\n';
  }
  os << "wall_time_s = " << format_number(run.wall_seconds) << '\n'
     << "wall_time_per_round_s = "
     << format_number(rounds_done ? run.wall_seconds / static_cast<double>(rounds_done) : 0.0)
     << '\n';
  if (cfg.certificate) {
    if (run.certificate) {
      const Theorem1Certificate& c = *run.certificate;
      os << "certificate = evaluated\n"
         << "certificate_a = " << format_number(c.a) << '\n'
         << "certificate_b = " << format_number(c.b) << '\n'
         << "certificate_rho = " << format_number(c.rho) << '\n'
         << "certificate_y_star_norm = " << format_number(c.y_star_norm) << '\n'
         << "certificate_x0_distance_p = " << format_number(c.x0_distance_p) << '\n'
         << "certificate_coupling_norm = " << format_number(c.coupling_norm) << '\n'
         << "certificate_rounds_checked = " << run.certificate_checked << '\n'
         << "certificate_violations = " << run.certificate_violations << '\n'
         << "certificate_holds = " << (run.certificate_violations == 0 ? "true" : "false")
         << '\n';
      if (rounds_done >= 1)
        os << "certificate_bound_consensus_final = "
           << format_number(c.bound_consensus(rounds_done)) << '\n'
           << "certificate_bound_objective_upper_final = "
           << format_number(c.bound_objective_upper(rounds_done)) << '\n';
    } else {
      os << "certificate = unavailable\n"
         << "certificate_reason = " << run.certificate_error << '\n';
    }
  }
  return os.str();
}

std::string schedule_tag(const std::string& schedule) {
  std::string tag;
  for (char ch : schedule) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-')
      tag += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    else if (ch == '^')
      tag += "pow";
    else
      tag += '_';
  }
  return tag;
}

ScheduleSeries series_of(const ExperimentConfig& cfg, const ScheduleRun& run) {
  ScheduleSeries s;
  s.label = run.schedule;
  s.is_zero = std::holds_alternative<Zero>(parse_schedule(run.schedule).rule());
  for (const TraceRow& r : run.rows) {
    s.error.push_back(cfg.problem == ProblemKind::Lasso ? r.objective_gap : r.primal_residual);
    s.agent0_broadcasts.push_back(r.broadcasts_agent0);
  }
  return s;
}

ComparisonTable compare_schedules(const std::vector<ScheduleSeries>& series,
                                  const std::vector<double>& thresholds) {
  ComparisonTable table;
  table.thresholds = thresholds;
  const ScheduleSeries* zero = nullptr;
  for (const auto& s : series)
    if (s.is_zero) zero = &s;

  auto first_reach = [](const ScheduleSeries& s, double thr) -> std::optional<std::size_t> {
    // index 0 is round 0, before any ergodic average exists
    for (std::size_t k = 1; k < s.error.size(); ++k)
      if (s.error[k] <= thr) return s.agent0_broadcasts[k];
    return std::nullopt;
  };

  for (const auto& s : series) {
    ComparisonRow row;
    row.label = s.label;
    for (double thr : thresholds) {
      const auto count = first_reach(s, thr);
      row.broadcasts.push_back(count);
      std::optional<double> ratio;
      if (zero && count) {
        const auto base = first_reach(*zero, thr);
        if (base && *base > 0)
          ratio = static_cast<double>(*count) / static_cast<double>(*base);
      }
      row.ratio_to_zero.push_back(ratio);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render(const ComparisonTable& table) {
  std::ostringstream os;
  os << "schedule";
  for (double t : table.thresholds) os << '\t' << "bcast@" << short_number(t);
  for (double t : table.thresholds) os << '\t' << "ratio@" << short_number(t);
  os << '\n';
  for (const auto& row : table.rows) {
    os << row.label;
    for (const auto& b : row.broadcasts) os << '\t' << (b ? std::to_string(*b) : "—");
    for (const auto& r : row.ratio_to_zero) os << '\t' << number_or_dash(r);
    os << '\n';
  }
  return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg_in, std::ostream* log) {
  ExperimentConfig cfg = cfg_in;
  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  write_file(out_dir / "config.txt", to_text(cfg));

  ExperimentResult result;
  std::ostringstream comparison;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedSetup setup = prepare_seed(cfg, seed, out_dir / "cache");
    write_file(out_dir / ("graph_seed_" + std::to_string(seed) + ".txt"),
               to_edge_list(*setup.graph));
    if (log)
      *log << "seed " << seed << ": " << setup.graph->edge_count() << " edges, F* = "
           << format_number(setup.reference.f_star)
           << (setup.reference.certified ? "" : " (reference not certified)") << '\n';

    std::vector<ScheduleSeries> series;
    for (const std::string& schedule : cfg.schedules) {
      ScheduleRun run = run_schedule(cfg, setup, schedule);
      const fs::path dir = out_dir / schedule_tag(schedule) / ("seed_" + std::to_string(seed));
      write_file(dir / "trace.csv", trace_csv(run));
      write_file(dir / "summary.txt", summary_text(cfg, setup, run));
      if (log) {
        *log << "  " << schedule << ": ";
        if (run.status == RunStatus::Completed && !run.rows.empty())
          *log << "gap " << format_number(run.rows.back().objective_gap) << ", agent-0 broadcasts "
               << run.rows.back().broadcasts_agent0 << '\n';
        else
          *log << "DIVERGED (" << run.failure << ")\n";
      }
      if (run.status == RunStatus::Diverged)
        result.diverged.push_back(schedule + " seed " + std::to_string(seed) + ": " + run.failure);
      if (cfg.compare) series.push_back(series_of(cfg, run));
      result.runs.push_back(std::move(run));
    }
    if (cfg.compare) {
      ComparisonTable table = compare_schedules(series);
      comparison << "seed " << seed << '\n' << render(table) << '\n';
      if (!result.comparison) result.comparison = std::move(table);
    }
  }
  if (cfg.compare) write_file(out_dir / "comparison.txt", comparison.str());
  return result;
}

}  // namespace etlalm
