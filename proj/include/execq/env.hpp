#pragma once

// Episodic execution environment. Decisions happen at the start of each of
// `periods` periods; the chosen lots are sold evenly every second of the
// period, and whatever is left after the last period is liquidated in one
// extra step.

#include <optional>
#include <vector>

#include "execq/features.hpp"
#include "execq/market_data.hpp"

namespace execq {

struct EnvConfig {
  int q0 = 20;
  int periods = 5;
  int seconds_per_period = 720;
  int terminal_seconds = 1;
  double penalty_a = 0.01;  // per second, on the squared child order
  int lot_multiple = 1;
  bool strict_terminal = false;  // force x = q at the last decision

  void validate() const;
  WindowLayout layout() const;
};

/// Decision-time state. `window` is borrowed; it must outlive the state.
struct EpisodeState {
  const EpisodeWindow* window = nullptr;
  int k = 0;
  int q = 0;
  double p = 0.0;
  double p_hour = 0.0;
  double qv_prev = 0.0;

  RawState raw() const { return {k, q, p, p_hour, qv_prev}; }
};

struct StepResult {
  double period_reward = 0.0;            // R_k
  std::optional<double> terminal_reward;  // liquidation reward, final step only
  EpisodeState next;
  bool terminal = false;

  /// Reward credited to the transition: R_k plus any terminal liquidation.
  double reward() const { return period_reward + terminal_reward.value_or(0.0); }
};

EpisodeState reset(const EpisodeWindow& window, const EnvConfig& cfg);

std::vector<int> admissible_actions(int k, int q, const EnvConfig& cfg);
std::vector<int> admissible_actions(const EpisodeState& state, const EnvConfig& cfg);
bool is_admissible(int k, int q, int x, const EnvConfig& cfg);

/// Executes x lots over period k. Per second i the reward is
/// q_i (p_{i+1} - p_i) - a (x/M)^2 with q_i the inventory before that
/// second's child order.
StepResult step(const EpisodeState& state, int x, const EnvConfig& cfg);

double terminal_reward(double price_at_end, double price_after, double q_left, double a);

/// Realised reward of selling everything left from `state` over the
/// remaining periods at the final decision (x = q at k = N-1).
double forced_liquidation_value(const EpisodeState& state, const EnvConfig& cfg);

/// Accumulates one episode's actions and rewards.
class EpisodeRecord {
 public:
  explicit EpisodeRecord(int periods) : periods_(periods) {}

  void record(int action, const StepResult& result);
  bool complete() const noexcept { return static_cast<int>(actions_.size()) == periods_; }

  const std::vector<int>& actions() const noexcept { return actions_; }
  const std::vector<double>& rewards() const noexcept { return rewards_; }
  std::optional<double> terminal() const noexcept { return terminal_; }
  int q_left() const noexcept { return q_left_; }

 private:
  int periods_;
  std::vector<int> actions_;
  std::vector<double> rewards_;  // R_k, without the terminal component
  std::optional<double> terminal_;
  int q_left_ = 0;
};

/// Sum of period rewards plus the terminal liquidation reward.
double episode_total_reward(const EpisodeRecord& record);

}  // namespace execq
