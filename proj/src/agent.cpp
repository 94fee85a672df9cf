#include "execq/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "execq/error.hpp"

namespace execq {

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("agent.gamma must lie in (0, 1]");
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0)) throw ArgumentError("agent.epsilon0 must lie in (0, 1]");
  if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("agent.tau must lie in (0, 1)");
  if (rho < 1) throw ArgumentError("agent.rho must be at least 1");
  if (batch < 1) throw ArgumentError("agent.batch must be at least 1");
  if (pretrain_episodes < 0) throw ArgumentError("agent.pretrain_episodes must be non-negative");
  if (episodes < 0) throw ArgumentError("agent.episodes must be non-negative");
  if (updates_per_step < 1) throw ArgumentError("agent.updates_per_step must be at least 1");
}

AgentState make_agent(const ModelContext& ctx, const AgentConfig& cfg, const NetConfig& net, std::uint64_t seed) {
  cfg.validate();
  ctx.env.validate();
  ctx.features.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::uint32_t words[4];
  seq.generate(words, words + 4);
  const std::uint64_t init_seed = (std::uint64_t{words[0]} << 32) | words[1];
  const std::uint64_t rng_seed = (std::uint64_t{words[2]} << 32) | words[3];

  AgentState a;
  a.main = init_network(NetworkShape{input_dim(ctx.feature_set), net.hidden_layers, net.hidden_units}, init_seed);
  a.target = copy_params(a.main);
  a.optimizer = make_rmsprop(a.main, net.rmsprop);
  a.epsilon = cfg.epsilon0;
  a.rng.seed(rng_seed);
  return a;
}

int select_greedy(const QNetworkParams& params, const RawState& state, const ModelContext& ctx) {
  if (state.q <= 0) return 0;
  const std::vector<int> actions = admissible_actions(state.k, state.q, ctx.env);
  int best = actions.front();
  double best_q = -std::numeric_limits<double>::infinity();
  for (int x : actions) {
    const FeatureVector v = build_state_vector(state, x, ctx.features, ctx.feature_set);
    const double value = forward(params, v.view());
    if (value > best_q) {  // strict: ties keep the smaller action
      best_q = value;
      best = x;
    }
  }
  return best;
}

Choice select_egreedy(const QNetworkParams& main, double epsilon, const RawState& state, const ModelContext& ctx,
                      std::mt19937_64& rng) {
  if (state.q <= 0) return {0, false};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    const int lot = ctx.env.lot_multiple;
    const int remaining = ctx.env.periods - state.k;
    std::binomial_distribution<int> draw(state.q / lot, 1.0 / remaining);
    int x = std::clamp(draw(rng) * lot, 0, state.q);
    if (!is_admissible(state.k, state.q, x, ctx.env)) x = state.q;  // strict final step
    return {x, true};
  }
  return {select_greedy(main, state, ctx), false};
}

NextTag next_tag(int next_k, int periods) {
  if (next_k == periods) return NextTag::terminal;
  if (next_k == periods - 1) return NextTag::penultimate;
  return NextTag::interior;
}

double build_target(const Transition& t, const QNetworkParams& main, const QNetworkParams& target, double gamma,
                    const ModelContext& ctx) {
  switch (t.tag) {
    case NextTag::terminal:
      return t.reward;
    case NextTag::penultimate:
      return t.reward + gamma * t.terminal_value;
    case NextTag::interior: {
      // no inventory left: every later reward is exactly zero
      if (t.next.q == 0) return t.reward;
      const int x_star = select_greedy(main, t.next, ctx);
      const FeatureVector v = build_state_vector(t.next, x_star, ctx.features, ctx.feature_set);
      return t.reward + gamma * forward(target, v.view());
    }
    case NextTag::none:
      break;
  }
  throw DataError("build_target: transition has no time tag");
}

double update_main(AgentState& agent, const ReplayBuffer& replay, const ModelContext& ctx, const AgentConfig& cfg) {
  const std::vector<const Transition*> picks = replay.sample(static_cast<std::size_t>(cfg.batch), agent.rng);
  std::vector<FeatureVector> inputs;
  inputs.reserve(picks.size());
  std::vector<Sample> batch;
  batch.reserve(picks.size());
  for (const Transition* t : picks) {
    inputs.push_back(build_state_vector(t->state, t->action, ctx.features, ctx.feature_set));
    const double y = build_target(*t, agent.main, agent.target, cfg.gamma, ctx);
    batch.push_back(Sample{inputs.back().view(), y});
  }
  LossAndGradient lg = loss_and_gradient(agent.main, batch);
  if (!std::isfinite(lg.loss)) throw TrainingError("non-finite loss");
  rmsprop_step(agent.main, agent.optimizer, lg.gradient);
  return lg.loss;
}

EpisodeOutcome run_learning_episode(AgentState& agent, const EpisodeWindow& window, const ModelContext& ctx,
                                    ReplayBuffer& replay, const AgentConfig& cfg, const ActionRule& rule) {
  EpisodeOutcome out;
  EpisodeState state = reset(window, ctx.env);
  for (int k = 0; k < ctx.env.periods && state.q > 0; ++k) {
    const Choice choice = rule(state);
    const StepResult res = step(state, choice.action, ctx.env);

    Transition t;
    t.state = state.raw();
    t.action = choice.action;
    t.reward = res.reward();
    t.next = res.next.raw();
    t.tag = next_tag(res.next.k, ctx.env.periods);
    if (t.tag == NextTag::penultimate) t.terminal_value = forced_liquidation_value(res.next, ctx.env);
    replay.push(t);

    for (int u = 0; u < cfg.updates_per_step; ++u) {
      out.loss_sum += update_main(agent, replay, ctx, cfg);
      ++out.updates;
    }
    ++out.transitions;
    out.explored += choice.explored ? 1 : 0;
    out.reward += res.reward();
    state = res.next;
  }
  return out;
}

void pretrain(AgentState& agent, std::span<const EpisodeWindow> windows, const ModelContext& ctx,
              ReplayBuffer& replay, const AgentConfig& cfg) {
  if (windows.empty()) throw ArgumentError("pretrain: no windows");
  const int last = ctx.env.periods - 1;
  const ActionRule sell_first = [](const EpisodeState& s) { return Choice{s.k == 0 ? s.q : 0, false}; };
  const ActionRule hold = [last](const EpisodeState& s) { return Choice{s.k == last ? s.q : 0, false}; };

  std::uniform_int_distribution<std::size_t> pick(0, windows.size() - 1);
  for (int e = 0; e < cfg.pretrain_episodes; ++e) {
    const EpisodeWindow& w = windows[pick(agent.rng)];
    run_learning_episode(agent, w, ctx, replay, cfg, e % 2 == 0 ? sell_first : hold);
    if ((e + 1) % cfg.rho == 0) agent.target = copy_params(agent.main);
  }
  agent.target = copy_params(agent.main);
  spdlog::debug("pretrained on {} boundary episodes", cfg.pretrain_episodes);
}

std::vector<EpisodeLog> train(AgentState& agent, std::span<const EpisodeWindow> windows, const ModelContext& ctx,
                              ReplayBuffer& replay, const AgentConfig& cfg, const TrainHooks& hooks) {
  if (windows.empty()) throw ArgumentError("train: no windows");
  cfg.validate();
  const std::size_t n_episodes = cfg.episodes > 0 ? static_cast<std::size_t>(cfg.episodes) : windows.size();

  std::vector<EpisodeLog> logs;
  logs.reserve(n_episodes);
  for (std::size_t b = 0; b < n_episodes; ++b) {
    const EpisodeWindow& w = windows[b % windows.size()];
    const double eps = agent.epsilon;
    const ActionRule rule = [&](const EpisodeState& s) {
      return select_egreedy(agent.main, eps, s.raw(), ctx, agent.rng);
    };

    EpisodeOutcome out;
    try {
      out = run_learning_episode(agent, w, ctx, replay, cfg, rule);
    } catch (const TrainingError& e) {
      spdlog::error("training aborted in episode {}: {}", agent.episodes, e.what());
      if (hooks.on_abort) hooks.on_abort(agent, e.what());
      throw;
    }

    EpisodeLog log;
    log.episode = agent.episodes;
    log.epsilon = eps;
    log.mean_loss = out.updates > 0 ? out.loss_sum / out.updates : 0.0;
    log.episode_reward = out.reward;
    log.eps_used = out.explored;
    logs.push_back(log);
    if (hooks.on_episode) hooks.on_episode(log);

    ++agent.episodes;
    agent.epsilon = cfg.epsilon0 * std::pow(cfg.tau, agent.episodes);
    if (agent.episodes % cfg.rho == 0) {
      agent.target = copy_params(agent.main);
      if (hooks.on_sync) hooks.on_sync(agent);
    }
  }
  return logs;
}

int PolicyGrid::action(int k, int q, int price_bucket, int qv_bucket) const {
  const auto it = std::find_if(cells.begin(), cells.end(), [&](const PolicyCell& c) {
    return c.k == k && c.q == q && c.price_bucket == price_bucket && c.qv_bucket == qv_bucket;
  });
  if (it == cells.end()) throw ArgumentError("PolicyGrid::action: no such cell");
  return it->action;
}

std::vector<double> bucket_levels(int n) {
  if (n < 1) throw ArgumentError("bucket count must be positive");
  std::vector<double> levels;
  for (int i = 0; i < n; ++i) levels.push_back(-1.0 + (2.0 * i + 1.0) / n);
  return levels;
}

RawState grid_state(int k, int q, double price_level, double qv_level, const ModelContext& ctx) {
  RawState s;
  s.k = k;
  s.q = q;
  s.p_hour = 0.0;
  s.p = price_level * ctx.features.price_scale;
  s.qv_prev = ctx.features.qv_mean + 2.0 * ctx.features.qv_std * qv_level;
  return s;
}

GridSpec effective_grid(const GridSpec& spec, FeatureSet set) {
  switch (set) {
    case FeatureSet::ti: return {1, 1};
    case FeatureSet::tip: return {spec.price_buckets, 1};
    case FeatureSet::tipqv: return {spec.price_buckets, spec.qv_buckets};
  }
  return spec;
}

}  // namespace execq
