#include <doctest.h>

#include "etlalm/config.hpp"
#include "etlalm/trigger.hpp"

using namespace etlalm;

TEST_CASE("empty config gives the lasso case-study defaults") {
  ExperimentConfig c = parse_config_text("");
  finalize(c);
  CHECK(c.problem == ProblemKind::Lasso);
  CHECK(c.agents == 100);
  CHECK(c.rows == 3);
  CHECK(c.dim == 50);
  CHECK(c.graph_r == 0.4);
  CHECK(c.eta == Vec{0.6});
  CHECK(c.beta == 0.0025);
  CHECK(c.schedules == std::vector<std::string>{"poly:20:1.2"});
  CHECK(c.rounds == 2000);
}

TEST_CASE("logistic defaults follow the second case study") {
  ExperimentConfig c = parse_config_text("problem = logistic\n");
  finalize(c);
  CHECK(c.dim == 10);
  CHECK(c.rows == 8);
  CHECK(c.graph_r == 0.04);
  CHECK(c.eta == Vec{55.0});
  CHECK(c.beta == 1.0);
  CHECK(c.rounds == 5000);
  CHECK(c.variant == Variant::Smooth);
  CHECK(parse_schedule(c.schedules.at(0)).rule() == parse_schedule("exp:1:0.9^0.1").rule());
}

TEST_CASE("explicit keys survive problem defaults") {
  ExperimentConfig c = parse_config_text("problem = logistic\nbeta = 0.5\nrounds = 10\n");
  finalize(c);
  CHECK(c.beta == 0.5);
  CHECK(c.rounds == 10);
  CHECK(c.eta == Vec{55.0});
}

TEST_CASE("config values") {
  ExperimentConfig c = parse_config_text(
      "# comment\n"
      "schedule = everyN:4\n"
      "seeds = 1, 2,3\n"
      "eta = auto\n"
      "beta = auto   # trailing comment\n"
      "certificate = true\n");
  CHECK(parse_schedule(c.schedules.at(0)).rule() == TriggerRule(EveryN{4}));
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.eta.empty());
  CHECK_FALSE(c.beta.has_value());
  CHECK(c.certificate);
}

TEST_CASE("config errors name the line") {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text, "cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("beta = -1\n").find("cfg:1") != std::string::npos);
  CHECK(message("\n\nbogus = 3\n").find("cfg:3") != std::string::npos);
  CHECK(message("rounds = ten\n").find("rounds") != std::string::npos);
  CHECK(message("schedule = poly:1:0.5\n").find("cfg:1") != std::string::npos);
  CHECK(message("just text\n").find("key = value") != std::string::npos);
  CHECK_FALSE(message("beta = 0\n").empty());
}

TEST_CASE("flags override file values") {
  ExperimentConfig c = parse_config_text("rounds = 100\nbeta = 0.1\n");
  apply_setting(c, "rounds", "5", "--rounds");
  apply_setting(c, "graph-r", "0.5", "--graph-r");
  CHECK(c.rounds == 5);
  CHECK(c.graph_r == 0.5);
  CHECK(c.beta == 0.1);
  CHECK_THROWS_AS(apply_setting(c, "nope", "1", "--nope"), ConfigError);
}

TEST_CASE("finalize rejects inconsistent settings") {
  ExperimentConfig c = parse_config_text("eta = 1,2,3\n");
  CHECK_THROWS_AS(finalize(c), ConfigError);
  ExperimentConfig d = parse_config_text("variant = smooth\n");
  CHECK_THROWS_AS(finalize(d), ConfigError);
}

TEST_CASE("effective config text parses back") {
  ExperimentConfig c = parse_config_text("problem = quadratic\nseeds = 4,5\n");
  finalize(c);
  std::string text = to_text(c);
  // the graph seed line is informational when unset
  text.replace(text.find("graph_seed = run-seed\n"), 22, "");
  ExperimentConfig back = parse_config_text(text);
  finalize(back);
  CHECK(to_text(back) == to_text(c));
}
