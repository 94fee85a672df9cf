#pragma once

// Benchmarks and performance metrics: TWAP schedules, per-window P&L with the
// quadratic execution penalty, basis-point improvement over TWAP and the
// summary statistics of its distribution.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "execq/agent.hpp"
#include "execq/env.hpp"

namespace execq {

/// floor(q0 / N) per period, remainder one lot each to the earliest periods.
std::vector<int> twap_schedule(int q0, int periods);

using ActionSource = std::function<int(const EpisodeState&)>;

ActionSource twap_policy(const EnvConfig& env);
/// Greedy policy of a frozen network (the parameters are copied).
ActionSource greedy_policy(const QNetworkParams& params, const ModelContext& ctx);

struct PolicyRun {
  double pnl = 0.0;
  std::vector<int> actions;
  int q_left = 0;  // liquidated in the trailing step
};

/// P&L = sum over seconds of child * p(start of second) - a child^2, plus the
/// trailing liquidation of any leftover inventory under the same accounting.
PolicyRun run_policy(const ActionSource& policy, const EpisodeWindow& window, const EnvConfig& env);

/// (model - twap) / twap * 1e4. Throws DomainError when twap == 0.
double delta_pnl(double model_pnl, double twap_pnl);

struct HourResult {
  std::string date;
  std::string hour;
  double model_pnl = 0.0;
  double twap_pnl = 0.0;
  double delta_bps = 0.0;

  bool operator==(const HourResult&) const = default;
};

enum class GlrStatus {
  defined,
  no_losses,  // reported as +inf
  no_gains,   // reported as 0
};

struct SummaryStats {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
  double glr = 0.0;
  GlrStatus glr_status = GlrStatus::defined;
  double win_probability = 0.0;

  bool operator==(const SummaryStats&) const = default;
};

SummaryStats summarize(std::span<const double> delta_bps);
SummaryStats summarize(std::span<const HourResult> results);

struct Histogram {
  double bin_width = 0.0;
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

/// Freedman-Diaconis binning; a single bin when the spread is degenerate.
Histogram freedman_diaconis(std::span<const double> values);

nlohmann::json to_json(const SummaryStats& stats);
SummaryStats summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FeatureConfig& cfg);
FeatureConfig feature_config_from_json(const nlohmann::json& j);

struct ReportFiles {
  std::filesystem::path summary_json;
  std::filesystem::path hourly_csv;
  std::filesystem::path histogram_csv;
};

ReportFiles report_files(const std::filesystem::path& dir);

/// Writes the summary JSON (pooled and per-hour statistics), the per-window
/// CSV and the histogram CSV.
void emit_report(const SummaryStats& stats, std::span<const HourResult> results, const ReportFiles& files,
                 const std::optional<FeatureConfig>& features = std::nullopt);

/// One heatmap CSV per (price, qv) bucket pair; returns the written paths.
std::vector<std::filesystem::path> write_policy_grid(const PolicyGrid& grid, const std::filesystem::path& dir);

}  // namespace execq
