#include "etlalm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "etlalm/trigger.hpp"

namespace etlalm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& v, const std::string& key, const std::string& origin) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0')
    throw ConfigError(origin + ": '" + key + "' expects a number, got '" + v + "'");
  return d;
}

std::uint64_t to_count(const std::string& v, const std::string& key, const std::string& origin) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ConfigError(origin + ": '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return std::strtoull(v.c_str(), nullptr, 10);
}

bool to_bool(const std::string& v, const std::string& key, const std::string& origin) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin + ": '" + key + "' expects true/false, got '" + v + "'");
}

void require_positive(double v, const std::string& key, const std::string& origin) {
  if (!(v > 0.0)) throw ConfigError(origin + ": '" + key + "' must be positive");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "problem", "agents",  "dim",           "rows",        "tau",     "ridge",
      "graph_r", "graph_seed", "beta",       "eta",         "variant", "schedule",
      "rounds",  "seeds",   "seed",          "out",         "reference_tol",
      "certificate", "rho", "compare",       "stepsize_policy", "threads"};
  return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in,
                   const std::string& origin) {
  std::string key = key_in;
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(value_in);
  if (key == "problem") {
    cfg.problem = parse_problem_kind(value);
  } else if (key == "agents" || key == "n") {
    key = "agents";
    cfg.agents = to_count(value, key, origin);
    if (cfg.agents < 1) throw ConfigError(origin + ": 'agents' must be >= 1");
  } else if (key == "dim" || key == "m") {
    key = "dim";
    cfg.dim = to_count(value, key, origin);
    if (cfg.dim < 1) throw ConfigError(origin + ": 'dim' must be >= 1");
  } else if (key == "rows") {
    cfg.rows = to_count(value, key, origin);
    if (cfg.rows < 1) throw ConfigError(origin + ": 'rows' must be >= 1");
  } else if (key == "tau") {
    cfg.tau = to_double(value, key, origin);
    if (!(cfg.tau >= 0.0)) throw ConfigError(origin + ": 'tau' must be nonnegative");
  } else if (key == "ridge") {
    cfg.ridge = to_double(value, key, origin);
    if (!(cfg.ridge >= 0.0)) throw ConfigError(origin + ": 'ridge' must be nonnegative");
  } else if (key == "graph_r") {
    cfg.graph_r = to_double(value, key, origin);
    if (!(cfg.graph_r > 0.0 && cfg.graph_r <= 1.0))
      throw ConfigError(origin + ": 'graph_r' must lie in (0, 1]");
  } else if (key == "graph_seed") {
    cfg.graph_seed = to_count(value, key, origin);
  } else if (key == "beta") {
    if (value == "auto") {
      cfg.beta.reset();
    } else {
      cfg.beta = to_double(value, key, origin);
      require_positive(*cfg.beta, key, origin);
    }
  } else if (key == "eta") {
    cfg.eta.clear();
    if (value != "auto")
      for (const auto& item : split_list(value)) {
        cfg.eta.push_back(to_double(item, key, origin));
        require_positive(cfg.eta.back(), key, origin);
      }
  } else if (key == "variant") {
    cfg.variant = parse_variant(value);
  } else if (key == "schedule" || key == "schedules") {
    key = "schedule";
    cfg.schedules = split_list(value);
    if (cfg.schedules.empty()) throw ConfigError(origin + ": 'schedule' is empty");
    for (const auto& s : cfg.schedules) {
      try {
        parse_schedule(s);
      } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
      }
    }
  } else if (key == "rounds") {
    cfg.rounds = to_count(value, key, origin);
  } else if (key == "seeds" || key == "seed") {
    key = "seeds";
    cfg.seeds.clear();
    for (const auto& item : split_list(value)) cfg.seeds.push_back(to_count(item, key, origin));
    if (cfg.seeds.empty()) throw ConfigError(origin + ": 'seeds' is empty");
  } else if (key == "out") {
    if (value.empty()) throw ConfigError(origin + ": 'out' is empty");
    cfg.out = value;
  } else if (key == "reference_tol") {
    cfg.reference_tol = to_double(value, key, origin);
    require_positive(cfg.reference_tol, key, origin);
  } else if (key == "certificate") {
    cfg.certificate = to_bool(value, key, origin);
  } else if (key == "rho") {
    if (value == "auto") {
      cfg.rho.reset();
    } else {
      cfg.rho = to_double(value, key, origin);
      require_positive(*cfg.rho, key, origin);
    }
  } else if (key == "compare") {
    cfg.compare = to_bool(value, key, origin);
  } else if (key == "stepsize_policy") {
    if (value == "enforce")
      cfg.stepsize_policy = StepsizePolicy::Enforce;
    else if (value == "warn")
      cfg.stepsize_policy = StepsizePolicy::WarnOnly;
    else
      throw ConfigError(origin + ": 'stepsize_policy' is enforce or warn");
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(to_count(value, key, origin));
  } else {
    throw ConfigError(origin + ": unknown key '" + key_in + "'");
  }
  cfg.explicit_keys.insert(key);
}

void finalize(ExperimentConfig& cfg) {
  auto fill = [&](const std::string& key, auto&& setter) {
    if (!cfg.explicit_keys.count(key)) setter();
  };
  switch (cfg.problem) {
    case ProblemKind::Lasso:
      break;
    case ProblemKind::Logistic:
      fill("dim", [&] { cfg.dim = 10; });
      fill("rows", [&] { cfg.rows = 8; });
      fill("graph_r", [&] { cfg.graph_r = 0.04; });
      fill("beta", [&] { cfg.beta = 1.0; });
      fill("eta", [&] { cfg.eta = {55.0}; });
      fill("variant", [&] { cfg.variant = Variant::Smooth; });
      fill("schedule", [&] { cfg.schedules = {"exp:1:0.9^0.1"}; });
      fill("rounds", [&] { cfg.rounds = 5000; });
      fill("tau", [&] { cfg.tau = 0.0; });
      break;
    case ProblemKind::Quadratic:
      fill("agents", [&] { cfg.agents = 20; });
      fill("dim", [&] { cfg.dim = 5; });
      fill("beta", [&] { cfg.beta.reset(); });
      fill("eta", [&] { cfg.eta.clear(); });
      fill("variant", [&] { cfg.variant = Variant::Smooth; });
      fill("schedule", [&] { cfg.schedules = {"exp:1:0.9"}; });
      fill("tau", [&] { cfg.tau = 0.0; });
      break;
  }
  if (cfg.problem != ProblemKind::Lasso && cfg.variant == Variant::NonsmoothOnly)
    throw ConfigError("variant 'nonsmooth' needs f = 0, which no built-in problem has");
  if (cfg.problem == ProblemKind::Lasso && cfg.variant != Variant::Composite && cfg.tau != 0.0)
    throw ConfigError("lasso with tau > 0 needs variant 'composite'");
  if (cfg.eta.size() > 1 && cfg.eta.size() != cfg.agents)
    throw ConfigError("'eta' lists " + std::to_string(cfg.eta.size()) + " values for " +
                      std::to_string(cfg.agents) + " agents");
  if (cfg.agents < 2) throw ConfigError("'agents' must be >= 2 for a random graph");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string origin = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1), origin);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto list = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& x : items) s += (s.empty() ? "" : ",") + fmt(x);
    return s;
  };
  os << "problem = " << to_string(cfg.problem) << '\n'
     << "agents = " << cfg.agents << '\n'
     << "dim = " << cfg.dim << '\n'
     << "rows = " << cfg.rows << '\n'
     << "tau = " << format_number(cfg.tau) << '\n'
     << "ridge = " << format_number(cfg.ridge) << '\n'
     << "graph_r = " << format_number(cfg.graph_r) << '\n'
     << "graph_seed = " << (cfg.graph_seed ? std::to_string(*cfg.graph_seed) : "run-seed") << '\n'
     << "beta = " << (cfg.beta ? format_number(*cfg.beta) : "auto") << '\n'
     << "eta = " << (cfg.eta.empty() ? "auto" : list(cfg.eta, format_number)) << '\n'
     << "variant = " << to_string(cfg.variant) << '\n'
     << "schedule = " << list(cfg.schedules, [](const std::string& s) { return s; }) << '\n'
     << "rounds = " << cfg.rounds << '\n'
     << "seeds = " << list(cfg.seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n'
     << "out = " << cfg.out << '\n'
     << "reference_tol = " << format_number(cfg.reference_tol) << '\n'
     << "certificate = " << (cfg.certificate ? "true" : "false") << '\n'
     << "rho = " << (cfg.rho ? format_number(*cfg.rho) : "auto") << '\n'
     << "compare = " << (cfg.compare ? "true" : "false") << '\n'
     << "stepsize_policy = "
     << (cfg.stepsize_policy == StepsizePolicy::Enforce ? "enforce" : "warn") << '\n'
     << "threads = " << cfg.threads << '\n';
  return os.str();
}

}  // namespace etlalm
