#include <benchmark/benchmark.h>

#include "execq/agent.hpp"
#include "execq/eval.hpp"
#include "execq/parallel.hpp"

namespace execq {
namespace {

struct Fixture {
  ModelContext ctx;
  QNetworkParams params;
  std::vector<EpisodeWindow> windows;

  explicit Fixture(std::size_t count) {
    ctx.env.seconds_per_period = 60;
    SynthSpec spec;
    spec.vol = 0.002;
    windows = synth_windows(spec, ctx.env.layout(), count);
    ctx.features = fit_feature_config(windows, ctx.env.q0, ctx.env.periods, ctx.env.seconds_per_period);
    params = init_network(input_dim(ctx.feature_set), 9);
  }
};

const Fixture& fixture() {
  static const Fixture f(256);
  return f;
}

void BM_EvaluateWindows(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto exec = static_cast<Execution>(state.range(0));
  const ActionSource model = greedy_policy(f.params, f.ctx);
  const ActionSource twap = twap_policy(f.ctx.env);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_windows(model, twap, f.windows, f.ctx.env, exec));
  state.SetLabel(exec == Execution::serial ? "serial" : "parallel");
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.windows.size()));
}
BENCHMARK(BM_EvaluateWindows)
    ->Arg(static_cast<int>(Execution::serial))
    ->Arg(static_cast<int>(Execution::parallel))
    ->Unit(benchmark::kMillisecond);

void BM_ExtractPolicyGrid(benchmark::State& state) {
  Fixture f(8);
  f.ctx.feature_set = FeatureSet::tipqv;
  f.params = init_network(input_dim(f.ctx.feature_set), 9);
  const auto exec = static_cast<Execution>(state.range(0));
  const GridSpec spec{9, 9};
  for (auto _ : state) benchmark::DoNotOptimize(extract_policy_grid(f.params, f.ctx, spec, exec));
  state.SetLabel(exec == Execution::serial ? "serial" : "parallel");
}
BENCHMARK(BM_ExtractPolicyGrid)
    ->Arg(static_cast<int>(Execution::serial))
    ->Arg(static_cast<int>(Execution::parallel))
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace execq

BENCHMARK_MAIN();
