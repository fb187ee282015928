// Round throughput: OpenMP engine at varying thread counts vs the serial stacked step.

#include <benchmark/benchmark.h>

#include <memory>

#include "etlalm/engine.hpp"
#include "etlalm/objective.hpp"

namespace {

using namespace etlalm;

struct Fixture {
  std::shared_ptr<ProblemInstance> inst;
  RunConfig config;
  SymmetricMatrix lap;
};

Fixture make_fixture(std::size_t n) {
  Fixture f;
  f.inst = std::make_shared<ProblemInstance>(make_lasso_instance(n, 3, 50, 0.1, 7));
  f.config.graph = std::make_shared<Graph>(generate_random_graph(n, 0.4, 7));
  f.config.objective =
      std::shared_ptr<const CompositeObjective>(f.inst, &f.inst->objective);
  f.config.schedule = parse_schedule("poly:20:1.2");
  f.config.beta = 0.0025;
  f.config.eta.assign(n, 0.6);
  f.config.rounds = 1;
  f.config.stepsize_policy = StepsizePolicy::WarnOnly;
  f.lap = laplacian(*f.config.graph);
  return f;
}

void BM_RunRound(benchmark::State& st) {
  Fixture f = make_fixture(static_cast<std::size_t>(st.range(0)));
  f.config.threads = static_cast<int>(st.range(1));
  NetworkState s = initial_state(f.config);
  for (auto _ : st) {
    s = run_round(std::move(s), f.config);
    benchmark::DoNotOptimize(s.agents.data());
  }
}

void BM_MatrixStep(benchmark::State& st) {
  Fixture f = make_fixture(static_cast<std::size_t>(st.range(0)));
  Mat x(f.config.graph->size(), 50), z(f.config.graph->size(), 50);
  for (auto _ : st) {
    auto [xn, zn] = matrix_lalm_step(x, z, *f.config.objective, f.lap, f.config.eta,
                                     f.config.beta);
    x = std::move(xn);
    z = std::move(zn);
    benchmark::DoNotOptimize(x.data().data());
  }
}

}  // namespace

BENCHMARK(BM_RunRound)->ArgsProduct({{100, 400}, {1, 2, 4, 8}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MatrixStep)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
