#include <gtest/gtest.h>

#include <cmath>

#include "execq/agent.hpp"
#include "execq/error.hpp"
#include "execq/parallel.hpp"

namespace execq {
namespace {

ModelContext small_context(FeatureSet set = FeatureSet::tip) {
  ModelContext ctx;
  ctx.env.q0 = 6;
  ctx.env.periods = 5;
  ctx.env.seconds_per_period = 3;
  ctx.env.penalty_a = 0.1;
  ctx.features.q0 = 6;
  ctx.features.periods = 5;
  ctx.features.price_scale = 0.05;
  ctx.features.qv_mean = 3e-4;
  ctx.features.qv_std = 1e-4;
  ctx.feature_set = set;
  return ctx;
}

std::vector<EpisodeWindow> small_windows(const ModelContext& ctx, std::size_t n, std::uint64_t seed = 4) {
  SynthSpec spec;
  spec.vol = 0.01;
  spec.seed = seed;
  return synth_windows(spec, ctx.env.layout(), n);
}

// Single hidden unit reading the transformed action: Q increases with x.
QNetworkParams action_lover(int dim, double sign = 1.0) {
  QNetworkParams p;
  DenseLayer h{1, dim, std::vector<double>(static_cast<std::size_t>(dim), 0.0), {0.0}};
  h.weights[2] = sign;
  p.layers.push_back(h);
  p.layers.push_back(DenseLayer{1, 1, {1.0}, {0.0}});
  return p;
}

// Prefers small actions: Q = 1 - relu(x~) / 2.
QNetworkParams action_hater(int dim) {
  QNetworkParams p = action_lover(dim);
  p.layers[1].weights[0] = -0.5;
  p.layers[1].bias[0] = 1.0;
  return p;
}

TEST(SelectGreedy, Basics) {
  const ModelContext ctx = small_context();
  const RawState empty{1, 0, 10, 10, 0};
  EXPECT_EQ(select_greedy(init_network(4, 1), empty, ctx), 0);
  const RawState s{1, 5, 10, 10, 3e-4};
  EXPECT_EQ(select_greedy(init_network(4, 1).zeros_like(), s, ctx), 0);
  EXPECT_EQ(select_greedy(action_lover(4), s, ctx), 5);
  EXPECT_EQ(select_greedy(action_hater(4), s, ctx), 0);
}

TEST(SelectEgreedy, EpsilonZeroIsGreedy) {
  const ModelContext ctx = small_context();
  std::mt19937_64 rng(1);
  const RawState s{0, 6, 10, 10, 3e-4};
  for (int i = 0; i < 50; ++i) {
    const Choice c = select_egreedy(action_lover(4), 0.0, s, ctx, rng);
    EXPECT_EQ(c.action, 6);
    EXPECT_FALSE(c.explored);
  }
}

TEST(SelectEgreedy, BinomialMeanIsRemainingTwap) {
  ModelContext ctx = small_context();
  ctx.env.q0 = 20;
  ctx.features.q0 = 20;
  std::mt19937_64 rng(2);
  const RawState s{0, 20, 10, 10, 3e-4};
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Choice c = select_egreedy(action_lover(4), 1.0, s, ctx, rng);
    EXPECT_TRUE(c.explored);
    EXPECT_GE(c.action, 0);
    EXPECT_LE(c.action, 20);
    sum += c.action;
  }
  // Binomial(20, 1/5): mean 4, sd 1.79
  EXPECT_NEAR(sum / n, 4.0, 4 * 1.79 / std::sqrt(n));
  const RawState last{4, 13, 10, 10, 3e-4};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(select_egreedy(action_hater(4), 1.0, last, ctx, rng).action, 13);
}

TEST(SelectEgreedy, LotMultipleDraws) {
  ModelContext ctx = small_context();
  ctx.env.q0 = 20;
  ctx.env.lot_multiple = 5;
  ctx.features.q0 = 20;
  std::mt19937_64 rng(3);
  const RawState s{1, 20, 10, 10, 3e-4};
  for (int i = 0; i < 200; ++i) EXPECT_EQ(select_egreedy(action_lover(4), 1.0, s, ctx, rng).action % 5, 0);
}

Transition interior_transition() {
  Transition t;
  t.state = RawState{1, 6, 10, 10, 3e-4};
  t.action = 2;
  t.reward = 0.7;
  t.next = RawState{2, 4, 10.1, 10, 3e-4};
  t.tag = NextTag::interior;
  return t;
}

TEST(BuildTarget, TerminalAndPenultimate) {
  const ModelContext ctx = small_context();
  const QNetworkParams net = init_network(4, 1);
  Transition t = interior_transition();
  t.tag = NextTag::terminal;
  t.reward = 1.88;
  EXPECT_EQ(build_target(t, net, net, 0.99, ctx), 1.88);
  t.tag = NextTag::penultimate;
  t.terminal_value = -0.5;
  EXPECT_DOUBLE_EQ(build_target(t, net, net, 0.99, ctx), 1.88 - 0.99 * 0.5);
  EXPECT_EQ(build_target(t, net, net, 0.0, ctx), 1.88);
  t.tag = NextTag::none;
  EXPECT_THROW(build_target(t, net, net, 0.99, ctx), DataError);
}

TEST(BuildTarget, DoubleDqnDecoupling) {
  const ModelContext ctx = small_context();
  const QNetworkParams lover = action_lover(4);
  const QNetworkParams hater = action_hater(4);
  const Transition t = interior_transition();
  const double gamma = 0.9;

  // main picks x' = q' = 4, target scores it
  const FeatureVector at_q = build_state_vector(t.next, 4, ctx.features, ctx.feature_set);
  EXPECT_DOUBLE_EQ(build_target(t, lover, hater, gamma, ctx), t.reward + gamma * forward(hater, at_q.view()));
  // swapped roles: main picks x' = 0
  const FeatureVector at_0 = build_state_vector(t.next, 0, ctx.features, ctx.feature_set);
  EXPECT_DOUBLE_EQ(build_target(t, hater, lover, gamma, ctx), t.reward + gamma * forward(lover, at_0.view()));
  EXPECT_NE(build_target(t, lover, hater, gamma, ctx), build_target(t, hater, lover, gamma, ctx));
  EXPECT_EQ(build_target(t, lover, hater, 0.0, ctx), t.reward);

  Transition done = t;
  done.next.q = 0;
  EXPECT_EQ(build_target(done, lover, hater, gamma, ctx), t.reward);
}

AgentConfig quick_config() {
  AgentConfig cfg;
  cfg.batch = 8;
  cfg.pretrain_episodes = 4;
  cfg.rho = 3;
  return cfg;
}

TEST(RunLearningEpisode, HoldPushesOneTransitionPerPeriod) {
  const ModelContext ctx = small_context();
  const auto ws = small_windows(ctx, 1);
  AgentConfig cfg = quick_config();
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 1);
  ReplayBuffer replay(100, 1);
  const ActionRule hold = [](const EpisodeState&) { return Choice{0, false}; };
  const EpisodeOutcome out = run_learning_episode(agent, ws[0], ctx, replay, cfg, hold);
  EXPECT_EQ(out.transitions, 5);
  ASSERT_EQ(replay.size(), 5u);
  EXPECT_EQ(replay.at(0).tag, NextTag::interior);
  EXPECT_EQ(replay.at(3).tag, NextTag::penultimate);
  EXPECT_EQ(replay.at(4).tag, NextTag::terminal);

  EpisodeState s = reset(ws[0], ctx.env);
  for (int k = 0; k < 4; ++k) s = step(s, 0, ctx.env).next;
  EXPECT_EQ(replay.at(3).terminal_value, forced_liquidation_value(s, ctx.env));
  EXPECT_EQ(replay.at(4).reward, step(s, 0, ctx.env).reward());
}

TEST(RunLearningEpisode, StopsWhenInventoryIsGone) {
  const ModelContext ctx = small_context();
  const auto ws = small_windows(ctx, 1);
  AgentConfig cfg = quick_config();
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 1);
  ReplayBuffer replay(100, 1);
  const ActionRule dump = [](const EpisodeState& s) { return Choice{s.q, false}; };
  EXPECT_EQ(run_learning_episode(agent, ws[0], ctx, replay, cfg, dump).transitions, 1);
}

TEST(Pretrain, BoundaryPoliciesAndCopy) {
  const ModelContext ctx = small_context();
  const auto ws = small_windows(ctx, 3);
  AgentConfig cfg = quick_config();
  cfg.pretrain_episodes = 2;
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 1);
  ReplayBuffer replay(100, 1);
  const QNetworkParams initial = agent.main;
  pretrain(agent, ws, ctx, replay, cfg);
  EXPECT_EQ(agent.main, agent.target);
  EXPECT_NE(agent.main, initial);
  ASSERT_EQ(replay.size(), 1u + 5u);
  EXPECT_EQ(replay.at(0).action, 6);  // sell everything first
  for (std::size_t i = 1; i < 5; ++i) EXPECT_EQ(replay.at(i).action, 0);
  EXPECT_EQ(replay.at(5).action, 6);
}

TEST(Train, EpsilonScheduleAndSyncInterval) {
  const ModelContext ctx = small_context();
  const auto ws = small_windows(ctx, 4);
  AgentConfig cfg = quick_config();
  cfg.tau = 0.9;
  cfg.episodes = 1;
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 5);
  ReplayBuffer replay(1000, 5);
  pretrain(agent, ws, ctx, replay, cfg);

  QNetworkParams held = agent.target;
  for (int n = 1; n <= 10; ++n) {
    train(agent, std::span(ws).subspan(static_cast<std::size_t>(n) % ws.size(), 1), ctx, replay, cfg);
    EXPECT_EQ(agent.episodes, n);
    EXPECT_EQ(agent.epsilon, cfg.epsilon0 * std::pow(cfg.tau, n));
    if (n % cfg.rho == 0) {
      EXPECT_EQ(agent.target, agent.main);
      held = agent.target;
    } else {
      EXPECT_EQ(agent.target, held);  // bitwise constant between syncs
    }
  }
}

TEST(Train, RhoOneSyncsEveryEpisode) {
  const ModelContext ctx = small_context();
  const auto ws = small_windows(ctx, 6);
  AgentConfig cfg = quick_config();
  cfg.rho = 1;
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 5);
  ReplayBuffer replay(1000, 5);
  TrainHooks hooks;
  int syncs = 0;
  hooks.on_sync = [&](const AgentState& a) {
    ++syncs;
    EXPECT_EQ(a.target, a.main);
  };
  train(agent, ws, ctx, replay, cfg, hooks);
  EXPECT_EQ(syncs, 6);
}

TEST(Train, ActionsStayAdmissibleAndRunIsDeterministic) {
  const ModelContext ctx = small_context(FeatureSet::tipqv);
  const auto ws = small_windows(ctx, 30);
  AgentConfig cfg = quick_config();
  cfg.episodes = 60;
  auto run = [&] {
    AgentState agent = make_agent(ctx, cfg, NetConfig{}, 77);
    ReplayBuffer replay(10000, 78);
    pretrain(agent, ws, ctx, replay, cfg);
    const auto logs = train(agent, ws, ctx, replay, cfg);
    for (std::size_t i = 0; i < replay.size(); ++i) {
      const Transition& t = replay.at(i);
      EXPECT_GE(t.action, 0);
      EXPECT_LE(t.action, t.state.q);
      EXPECT_EQ(t.next.q, t.state.q - t.action);
    }
    EXPECT_EQ(logs.size(), 60u);
    return agent;
  };
  const AgentState a = run();
  const AgentState b = run();
  EXPECT_EQ(a.main, b.main);
  EXPECT_EQ(a.target, b.target);
  EXPECT_EQ(a.optimizer, b.optimizer);
}

TEST(Train, EmptyWindowsRejected) {
  const ModelContext ctx = small_context();
  AgentConfig cfg = quick_config();
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 1);
  ReplayBuffer replay(10, 1);
  EXPECT_THROW(train(agent, {}, ctx, replay, cfg), ArgumentError);
  EXPECT_THROW(pretrain(agent, {}, ctx, replay, cfg), ArgumentError);
}

TEST(AgentConfig, Validation) {
  AgentConfig cfg;
  cfg.tau = 1.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = AgentConfig{};
  cfg.rho = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = AgentConfig{};
  cfg.gamma = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(PolicyGrid, CellsAreAdmissible) {
  ModelContext ctx = small_context(FeatureSet::tipqv);
  const QNetworkParams net = init_network(5, 31);
  const PolicyGrid grid = extract_policy_grid(net, ctx, GridSpec{3, 3}, Execution::serial);
  EXPECT_EQ(grid.cells.size(), 3u * 3u * 5u * 6u);
  for (const PolicyCell& c : grid.cells) {
    EXPECT_GE(c.action, 0);
    EXPECT_LE(c.action, c.q);
  }
  ctx.env.strict_terminal = true;
  const PolicyGrid strict = extract_policy_grid(net, ctx, GridSpec{3, 3}, Execution::serial);
  for (const PolicyCell& c : strict.cells)
    if (c.k == ctx.env.periods - 1) EXPECT_EQ(c.action, c.q);
  EXPECT_EQ(strict.action(4, 3, 2, 1), 3);
}

TEST(PolicyGrid, BucketsFollowFeatureSet) {
  const ModelContext ti = small_context(FeatureSet::ti);
  EXPECT_EQ(extract_policy_grid(init_network(3, 1), ti, GridSpec{3, 3}).cells.size(), 5u * 6u);
  const ModelContext tip = small_context(FeatureSet::tip);
  const PolicyGrid g = extract_policy_grid(init_network(4, 1), tip, GridSpec{3, 3});
  EXPECT_EQ(g.price_levels.size(), 3u);
  EXPECT_EQ(g.qv_levels.size(), 1u);
  const std::vector<double> levels = bucket_levels(3);
  ASSERT_EQ(levels.size(), 3u);
  EXPECT_NEAR(levels[0], -2.0 / 3.0, 1e-15);
  EXPECT_EQ(levels[1], 0.0);
  EXPECT_NEAR(levels[2], 2.0 / 3.0, 1e-15);
}

TEST(GridState, FeaturesHitBucketLevels) {
  const ModelContext ctx = small_context(FeatureSet::tipqv);
  const RawState s = grid_state(2, 4, 0.5, -0.25, ctx);
  const FeatureVector v = build_state_vector(s, 1, ctx.features, ctx.feature_set);
  EXPECT_NEAR(v[3], 0.5, 1e-12);
  EXPECT_NEAR(v[4], -0.25, 1e-12);
}

TEST(ExtractPolicyGrid, MeanRevertingPricesSellMoreWhenHigh) {
  ModelContext ctx;
  ctx.env.seconds_per_period = 10;
  ctx.env.penalty_a = 0.1;
  SynthSpec spec;
  spec.model = SynthModel::ou;
  spec.kappa = 0.05;
  spec.vol = 0.01;
  spec.seed = 1;
  const auto windows = synth_windows(spec, ctx.env.layout(), 500);
  ctx.features = fit_feature_config(windows, ctx.env.q0, ctx.env.periods, ctx.env.seconds_per_period);

  AgentConfig cfg;
  cfg.episodes = 2000;
  cfg.tau = 0.998;
  AgentState agent = make_agent(ctx, cfg, NetConfig{}, 3);
  ReplayBuffer replay(10000, 5);
  pretrain(agent, windows, ctx, replay, cfg);
  train(agent, windows, ctx, replay, cfg);

  const PolicyGrid grid = extract_policy_grid(agent.main, ctx, GridSpec{3, 1});
  double low = 0.0, high = 0.0;
  for (int k = 0; k + 1 < ctx.env.periods; ++k)
    for (int q = 1; q <= ctx.env.q0; ++q) {
      low += grid.action(k, q, 0);
      high += grid.action(k, q, 2);
    }
  EXPECT_GT(high, low);
}

}  // namespace
}  // namespace execq
