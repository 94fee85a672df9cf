#pragma once

// Double-DQN execution learner: epsilon-greedy action selection with
// Binomial exploration, replay-based updates of the main network against
// targets evaluated by the target network, boundary-case pre-training and
// periodic target synchronisation.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "execq/env.hpp"
#include "execq/features.hpp"
#include "execq/nn.hpp"
#include "execq/replay.hpp"

namespace execq {

struct AgentConfig {
  double gamma = 0.99;
  double epsilon0 = 1.0;
  double tau = 0.995;  // epsilon decay per episode
  int rho = 15;        // target sync interval, episodes
  int batch = 32;
  int pretrain_episodes = 200;
  int episodes = 0;           // 0 = one pass over the training windows
  int updates_per_step = 1;   // gradient steps after each environment step

  void validate() const;
};

struct NetConfig {
  int hidden_layers = 6;
  int hidden_units = 20;
  RmsPropConfig rmsprop;
};

/// Everything needed to turn a raw state into network inputs and actions.
struct ModelContext {
  EnvConfig env;
  FeatureConfig features;
  FeatureSet feature_set = FeatureSet::tip;
};

struct AgentState {
  QNetworkParams main;
  QNetworkParams target;
  RmsPropState optimizer;
  double epsilon = 1.0;
  int episodes = 0;  // completed training episodes
  std::mt19937_64 rng;
};

AgentState make_agent(const ModelContext& ctx, const AgentConfig& cfg, const NetConfig& net, std::uint64_t seed);

/// Argmax of Q over admissible actions; ties go to the smallest action.
int select_greedy(const QNetworkParams& params, const RawState& state, const ModelContext& ctx);

struct Choice {
  int action = 0;
  bool explored = false;
};

/// With probability epsilon draw Binomial(q, 1 / periods remaining) (in lot
/// units), otherwise act greedily.
Choice select_egreedy(const QNetworkParams& main, double epsilon, const RawState& state, const ModelContext& ctx,
                      std::mt19937_64& rng);

NextTag next_tag(int next_k, int periods);

/// Regression target for one stored transition. The interior case picks the
/// next action with `main` and scores it with `target`.
double build_target(const Transition& t, const QNetworkParams& main, const QNetworkParams& target, double gamma,
                    const ModelContext& ctx);

/// Samples a minibatch, builds targets and applies one RMSprop step to the
/// main network. Returns the batch loss.
double update_main(AgentState& agent, const ReplayBuffer& replay, const ModelContext& ctx, const AgentConfig& cfg);

struct EpisodeLog {
  int episode = 0;
  double epsilon = 0.0;
  double mean_loss = 0.0;
  double episode_reward = 0.0;
  int eps_used = 0;  // exploratory actions taken
};

struct TrainHooks {
  std::function<void(const EpisodeLog&)> on_episode;
  std::function<void(const AgentState&)> on_sync;
  std::function<void(const AgentState&, const std::string&)> on_abort;
};

/// Runs one environment episode with the given action rule, pushing each
/// transition and updating after every step. Stops early once inventory is 0.
struct EpisodeOutcome {
  int transitions = 0;
  int explored = 0;
  double reward = 0.0;
  double loss_sum = 0.0;
  int updates = 0;
};

using ActionRule = std::function<Choice(const EpisodeState&)>;
EpisodeOutcome run_learning_episode(AgentState& agent, const EpisodeWindow& window, const ModelContext& ctx,
                                    ReplayBuffer& replay, const AgentConfig& cfg, const ActionRule& rule);

/// Boundary-case pre-training: alternates sell-everything-at-the-first-step
/// and hold-then-sell-at-the-last-step episodes on randomly drawn windows,
/// then copies main into target.
void pretrain(AgentState& agent, std::span<const EpisodeWindow> windows, const ModelContext& ctx,
              ReplayBuffer& replay, const AgentConfig& cfg);

std::vector<EpisodeLog> train(AgentState& agent, std::span<const EpisodeWindow> windows, const ModelContext& ctx,
                              ReplayBuffer& replay, const AgentConfig& cfg, const TrainHooks& hooks = {});

struct PolicyCell {
  int k = 0;
  int q = 0;
  int price_bucket = 0;
  int qv_bucket = 0;
  int action = 0;
};

struct GridSpec {
  int price_buckets = 3;
  int qv_buckets = 3;
};

struct PolicyGrid {
  std::vector<double> price_levels;  // transformed-price value per bucket
  std::vector<double> qv_levels;     // standardised-QV value per bucket
  std::vector<PolicyCell> cells;     // ordered by (price, qv, k, q)

  int action(int k, int q, int price_bucket = 0, int qv_bucket = 0) const;
};

/// Bucket centres of [-1, 1] split into n equal slices.
std::vector<double> bucket_levels(int n);

/// Raw state whose transformed price/QV features equal the given levels.
RawState grid_state(int k, int q, double price_level, double qv_level, const ModelContext& ctx);

/// Number of (price, qv) bucket pairs the feature set distinguishes.
GridSpec effective_grid(const GridSpec& spec, FeatureSet set);

}  // namespace execq
