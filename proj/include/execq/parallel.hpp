#pragma once

// Read-only kernels over a frozen policy. The OpenMP versions fan out over
// independent windows or grid cells and write into pre-sized outputs, so they
// return exactly what the serial references return.

#include <span>
#include <vector>

#include "execq/agent.hpp"
#include "execq/eval.hpp"

namespace execq {

enum class Execution { serial, parallel };

namespace serial {

PolicyGrid extract_policy_grid(const QNetworkParams& params, const ModelContext& ctx, const GridSpec& spec);

std::vector<HourResult> evaluate_windows(const ActionSource& model, const ActionSource& baseline,
                                         std::span<const EpisodeWindow> windows, const EnvConfig& env);

}  // namespace serial

/// Greedy action for every (price bucket, qv bucket, k, q) cell with q a
/// positive multiple of the lot size.
PolicyGrid extract_policy_grid(const QNetworkParams& params, const ModelContext& ctx, const GridSpec& spec,
                               Execution exec = Execution::parallel);

/// Runs both policies on every window; rows are sorted by (date, hour).
/// Both action sources must be safe to call concurrently.
std::vector<HourResult> evaluate_windows(const ActionSource& model, const ActionSource& baseline,
                                         std::span<const EpisodeWindow> windows, const EnvConfig& env,
                                         Execution exec = Execution::parallel);

int max_threads() noexcept;

}  // namespace execq
