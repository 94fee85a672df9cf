#include "execq/env.hpp"

#include <string>

#include "execq/error.hpp"

namespace execq {

void EnvConfig::validate() const {
  if (q0 <= 0) throw ArgumentError("env.q0 must be positive");
  if (periods < 2) throw ArgumentError("env.periods must be at least 2");
  if (seconds_per_period < 1) throw ArgumentError("env.seconds_per_period must be at least 1");
  if (terminal_seconds < 1) throw ArgumentError("terminal liquidation needs at least one second");
  if (!(penalty_a >= 0.0)) throw ArgumentError("env.penalty_a must be non-negative");
  if (lot_multiple < 1) throw ArgumentError("env.lot_multiple must be at least 1");
  if (q0 % lot_multiple != 0) throw ArgumentError("env.q0 must be a multiple of env.lot_multiple");
}

WindowLayout EnvConfig::layout() const {
  return WindowLayout{periods, seconds_per_period, seconds_per_period, terminal_seconds};
}

EpisodeState reset(const EpisodeWindow& window, const EnvConfig& cfg) {
  const int needed = cfg.periods * cfg.seconds_per_period + cfg.terminal_seconds;
  if (window.lead_seconds < 1 || window.duration_seconds() - window.lead_seconds < needed)
    throw ArgumentError("reset: window too short for the configured horizon");

  EpisodeState s;
  s.window = &window;
  s.k = 0;
  s.q = cfg.q0;
  s.p = window.price_at(0);
  s.p_hour = window.hour_start_price();
  s.qv_prev = previous_period_qv(window, 0, cfg.seconds_per_period);
  return s;
}

std::vector<int> admissible_actions(int k, int q, const EnvConfig& cfg) {
  if (q <= 0) return {0};
  if (cfg.strict_terminal && k == cfg.periods - 1) return {q};
  std::vector<int> acts;
  acts.reserve(static_cast<std::size_t>(q / cfg.lot_multiple) + 2);
  for (int x = 0; x < q; x += cfg.lot_multiple) acts.push_back(x);
  acts.push_back(q);
  return acts;
}

std::vector<int> admissible_actions(const EpisodeState& state, const EnvConfig& cfg) {
  return admissible_actions(state.k, state.q, cfg);
}

bool is_admissible(int k, int q, int x, const EnvConfig& cfg) {
  if (q <= 0) return x == 0;
  if (x < 0 || x > q) return false;
  if (cfg.strict_terminal && k == cfg.periods - 1) return x == q;
  return x == q || x % cfg.lot_multiple == 0;
}

double terminal_reward(double price_at_end, double price_after, double q_left, double a) {
  if (q_left < 0.0) throw ArgumentError("terminal_reward: negative inventory");
  return q_left * (price_after - price_at_end) - a * q_left * q_left;
}

StepResult step(const EpisodeState& state, int x, const EnvConfig& cfg) {
  if (state.window == nullptr) throw StateError("step: state has no window");
  if (state.k < 0 || state.k >= cfg.periods) throw StateError("step: episode already finished");
  if (!is_admissible(state.k, state.q, x, cfg))
    throw DomainError("step: inadmissible action " + std::to_string(x) + " with q=" + std::to_string(state.q));

  const EpisodeWindow& w = *state.window;
  const int m = cfg.seconds_per_period;
  const int t0 = state.k * m;
  const double child = static_cast<double>(x) / m;
  const double penalty = cfg.penalty_a * child * child;

  double reward = 0.0;
  double inventory = state.q;
  double p_prev = w.price_at(t0);
  for (int i = 0; i < m; ++i) {
    const double p_next = w.price_at(t0 + i + 1);
    reward += inventory * (p_next - p_prev) - penalty;
    inventory -= child;
    p_prev = p_next;
  }

  StepResult out;
  out.period_reward = reward;
  out.next = state;
  out.next.k = state.k + 1;
  out.next.q = state.q - x;
  const int t1 = t0 + m;
  out.next.p = w.price_at(t1);
  out.next.qv_prev = compute_qv(w.path(t0, t1));
  if (out.next.k == cfg.periods) {
    out.terminal = true;
    out.terminal_reward =
        terminal_reward(w.price_at(t1), w.price_at(t1 + cfg.terminal_seconds), out.next.q, cfg.penalty_a);
  }
  return out;
}

double forced_liquidation_value(const EpisodeState& state, const EnvConfig& cfg) {
  if (state.k != cfg.periods - 1) throw StateError("forced_liquidation_value: not at the final decision");
  if (state.q == 0) return 0.0;
  return step(state, state.q, cfg).reward();
}

void EpisodeRecord::record(int action, const StepResult& result) {
  if (complete()) throw StateError("EpisodeRecord: episode already complete");
  actions_.push_back(action);
  rewards_.push_back(result.period_reward);
  q_left_ = result.next.q;
  if (result.terminal) terminal_ = result.terminal_reward;
}

double episode_total_reward(const EpisodeRecord& record) {
  if (!record.complete() || !record.terminal()) throw StateError("episode_total_reward: episode incomplete");
  double total = 0.0;
  for (double r : record.rewards()) total += r;
  return total + *record.terminal();
}

}  // namespace execq
