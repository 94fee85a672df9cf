#include <gtest/gtest.h>

#include "execq/parallel.hpp"

namespace execq {
namespace {

ModelContext context(FeatureSet set) {
  ModelContext ctx;
  ctx.env.q0 = 10;
  ctx.env.periods = 4;
  ctx.env.seconds_per_period = 5;
  ctx.env.penalty_a = 0.05;
  ctx.features.q0 = 10;
  ctx.features.periods = 4;
  ctx.features.price_scale = 0.04;
  ctx.features.qv_std = 2e-4;
  ctx.features.qv_mean = 5e-4;
  ctx.feature_set = set;
  return ctx;
}

TEST(Kernels, PolicyGridMatchesSerialReference) {
  for (FeatureSet set : {FeatureSet::ti, FeatureSet::tip, FeatureSet::tipqv}) {
    const ModelContext ctx = context(set);
    const QNetworkParams net = init_network(input_dim(set), 13);
    const PolicyGrid a = serial::extract_policy_grid(net, ctx, GridSpec{4, 3});
    const PolicyGrid b = extract_policy_grid(net, ctx, GridSpec{4, 3}, Execution::parallel);
    ASSERT_EQ(a.cells.size(), b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      EXPECT_EQ(a.cells[i].k, b.cells[i].k);
      EXPECT_EQ(a.cells[i].q, b.cells[i].q);
      EXPECT_EQ(a.cells[i].price_bucket, b.cells[i].price_bucket);
      EXPECT_EQ(a.cells[i].qv_bucket, b.cells[i].qv_bucket);
      EXPECT_EQ(a.cells[i].action, b.cells[i].action);
    }
    EXPECT_EQ(a.price_levels, b.price_levels);
  }
}

TEST(Kernels, GridOrderIsPriceQvPeriodInventory) {
  const ModelContext ctx = context(FeatureSet::tipqv);
  const PolicyGrid g = extract_policy_grid(init_network(5, 1), ctx, GridSpec{2, 2});
  ASSERT_EQ(g.cells.size(), 2u * 2u * 4u * 10u);
  EXPECT_EQ(g.cells[0].q, 1);
  EXPECT_EQ(g.cells[9].q, 10);
  EXPECT_EQ(g.cells[10].k, 1);
  EXPECT_EQ(g.cells[40].qv_bucket, 1);
  EXPECT_EQ(g.cells[80].price_bucket, 1);
}

TEST(Kernels, EvaluateWindowsMatchesSerialAndSorts) {
  const ModelContext ctx = context(FeatureSet::tipqv);
  SynthSpec spec;
  spec.vol = 0.01;
  auto ws = synth_windows(spec, ctx.env.layout(), 40);
  std::reverse(ws.begin(), ws.end());
  const QNetworkParams net = init_network(5, 3);
  const ActionSource model = greedy_policy(net, ctx);
  const ActionSource twap = twap_policy(ctx.env);
  const auto a = serial::evaluate_windows(model, twap, ws, ctx.env);
  const auto b = evaluate_windows(model, twap, ws, ctx.env, Execution::parallel);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 40u);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i - 1].date, a[i].date);
  const auto self = evaluate_windows(twap, twap, ws, ctx.env);
  for (const HourResult& r : self) EXPECT_EQ(r.delta_bps, 0.0);
}

TEST(Kernels, ErrorsInsideParallelRegionPropagate) {
  const ModelContext ctx = context(FeatureSet::tip);
  SynthSpec spec;
  const auto ws = synth_windows(spec, ctx.env.layout(), 8);
  const ActionSource bad = [](const EpisodeState& s) { return s.q + 1; };
  EXPECT_THROW(evaluate_windows(bad, twap_policy(ctx.env), ws, ctx.env), DomainError);
}

}  // namespace
}  // namespace execq
