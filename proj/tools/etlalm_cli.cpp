// etlalm: run event-triggered decentralized optimization experiments.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "etlalm/config.hpp"
#include "etlalm/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered linearized augmented Lagrangian experiments"};

  std::string config_path;
  std::vector<std::string> schedules;
  std::vector<std::string> seeds;
  std::map<std::string, std::string> values;
  bool certificate = false, compare = false, print_config = false;

  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--problem", values["problem"], "lasso | logistic | quadratic");
  app.add_option("--schedule", schedules,
                 "trigger schedule, repeatable: poly:E0:p, exp:E0:rho, zero, everyN:N");
  app.add_option("--rounds", values["rounds"], "number of rounds");
  app.add_option("--seed", seeds, "instance/graph seed, repeatable");
  app.add_option("--out", values["out"], "output directory");
  app.add_option("--beta", values["beta"], "penalty β, or 'auto'");
  app.add_option("--eta", values["eta"], "proximal weight, comma list per agent, or 'auto'");
  app.add_option("--graph-r", values["graph_r"], "edge density r of the random graph");
  app.add_option("--graph-seed", values["graph_seed"], "graph seed (default: run seed)");
  app.add_option("--agents", values["agents"], "number of agents n");
  app.add_option("--dim", values["dim"], "decision dimension m");
  app.add_option("--rows", values["rows"], "local rows p_i / samples m_i");
  app.add_option("--tau", values["tau"], "l1 weight");
  app.add_option("--ridge", values["ridge"], "logistic ridge weight");
  app.add_option("--variant", values["variant"], "composite | smooth | nonsmooth");
  app.add_option("--threads", values["threads"], "OpenMP threads (0: default)");
  app.add_option("--reference-tol", values["reference_tol"], "centralized solver tolerance");
  app.add_option("--rho", values["rho"], "certificate ρ, or 'auto'");
  app.add_option("--stepsize-policy", values["stepsize_policy"], "enforce | warn");
  app.add_flag("--certificate", certificate, "evaluate the O(1/t) certificate (n <= 64)");
  app.add_flag("--compare", compare, "write comparison.txt across schedules");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    etlalm::ExperimentConfig cfg =
        config_path.empty() ? etlalm::ExperimentConfig{} : etlalm::parse_config_file(config_path);
    for (const auto& [key, value] : values)
      if (!value.empty()) etlalm::apply_setting(cfg, key, value, "--" + key);
    auto join = [](const std::vector<std::string>& items) {
      std::string s;
      for (const auto& x : items) s += (s.empty() ? "" : ",") + x;
      return s;
    };
    if (!schedules.empty()) etlalm::apply_setting(cfg, "schedule", join(schedules), "--schedule");
    if (!seeds.empty()) etlalm::apply_setting(cfg, "seeds", join(seeds), "--seed");
    if (certificate) etlalm::apply_setting(cfg, "certificate", "true", "--certificate");
    if (compare) etlalm::apply_setting(cfg, "compare", "true", "--compare");
    etlalm::finalize(cfg);

    if (print_config) {
      std::cout << etlalm::to_text(cfg);
      return 0;
    }

    const etlalm::ExperimentResult result = etlalm::run_experiment(cfg, &std::cout);
    if (result.comparison) std::cout << '\n' << etlalm::render(*result.comparison);
    for (const auto& d : result.diverged) std::cerr << "diverged: " << d << '\n';
    return result.exit_code();
  } catch (const etlalm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
