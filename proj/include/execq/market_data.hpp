#pragma once

// Second-level midprice series: loading, validation, episode windows and
// synthetic generators.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace execq {

struct PricePoint {
  std::int64_t timestamp = 0;  // seconds since epoch
  double midprice = 0.0;

  bool operator==(const PricePoint&) const = default;
};

/// One instrument sampled every second. Within a trading session the series
/// is gap-free; seconds that were missing in the source are forward-filled and
/// flagged in `filled`.
struct PriceSeries {
  std::string instrument;
  std::vector<PricePoint> points;
  std::vector<std::uint8_t> filled;  // parallel to points; 1 = forward-filled
  std::size_t filled_count = 0;

  std::size_t size() const noexcept { return points.size(); }
};

struct LoadOptions {
  // Gaps longer than this are treated as session breaks and left unfilled.
  std::int64_t max_fill_gap_s = 3600;
};

PriceSeries parse_price_series(std::istream& in, std::string instrument, const LoadOptions& opts = {});
PriceSeries load_price_series(const std::filesystem::path& path, std::string instrument,
                              const LoadOptions& opts = {});

/// Writes `timestamp_s,midprice` CSV using shortest round-trip decimal prices.
void write_price_series(std::ostream& out, const PriceSeries& series);
std::string format_price(double price);

/// Seconds layout of one episode: a leading period (for the initial quadratic
/// variation), `periods` decision periods, and a trailing liquidation step.
struct WindowLayout {
  int periods = 5;
  int seconds_per_period = 720;
  int lead_seconds = 720;
  int terminal_seconds = 1;

  int horizon_seconds() const noexcept { return periods * seconds_per_period; }
  /// Seconds spanned by a window: lead + horizon + terminal.
  int duration_seconds() const noexcept { return lead_seconds + horizon_seconds() + terminal_seconds; }
  /// Price points in a window (one per second, both ends inclusive).
  std::size_t point_count() const noexcept { return static_cast<std::size_t>(duration_seconds()) + 1; }
};

/// Prices from T0 - lead to T_N + terminal, one per second.
struct EpisodeWindow {
  std::string date;        // YYYY-MM-DD, or a synthetic id
  std::string hour_label;  // "11", "12", "13" or "synthetic"
  std::int64_t start_ts = 0;  // timestamp of T0
  int lead_seconds = 0;
  std::vector<double> prices;

  /// Price `s` seconds after T0 (negative s reaches into the lead period).
  double price_at(int s) const { return prices.at(static_cast<std::size_t>(lead_seconds + s)); }
  double hour_start_price() const { return price_at(0); }
  /// Lead-period path, T0 - lead .. T0 inclusive.
  std::span<const double> lead_path() const {
    return std::span<const double>(prices).first(static_cast<std::size_t>(lead_seconds) + 1);
  }
  std::span<const double> path(int from_s, int to_s) const;
  int duration_seconds() const noexcept { return static_cast<int>(prices.size()) - 1; }
};

struct SkipRecord {
  std::string date;
  std::string hour;
  std::string reason;
};

struct SliceOptions {
  std::vector<int> hours{11, 12, 13};
  std::int64_t utc_offset_s = 0;  // added to timestamps before computing day/hour
  double max_gap_fraction = 0.05;
};

struct SliceResult {
  std::vector<EpisodeWindow> windows;
  std::vector<SkipRecord> skipped;
};

SliceResult slice_windows(const PriceSeries& series, const WindowLayout& layout, const SliceOptions& opts = {});
void write_skip_log(std::ostream& out, std::span<const SkipRecord> skipped);

/// YYYY-MM-DD for a day count since 1970-01-01.
std::string civil_date(std::int64_t days_since_epoch);

enum class SynthModel { martingale, drift, ou };

SynthModel parse_synth_model(const std::string& name);
std::string to_string(SynthModel model);

struct SynthSpec {
  SynthModel model = SynthModel::martingale;
  double vol = 0.01;   // per-second standard deviation of the Gaussian shock
  double mu = 0.0;     // drift per second (drift model)
  double kappa = 0.0;  // mean-reversion rate per second (ou model)
  double pbar = 10.0;  // mean-reversion level (ou model)
  double p0 = 10.0;
  std::uint64_t seed = 1;
};

/// Reproducible synthetic series of `length` seconds starting at `start_ts`.
/// martingale: p' = p + vol Z; drift: p' = p + mu + vol Z; ou: p' = p + kappa (pbar - p) + vol Z.
PriceSeries synth_series(const SynthSpec& spec, std::size_t length, std::int64_t start_ts = 0);

/// `count` independent synthetic windows, each from its own derived seed.
std::vector<EpisodeWindow> synth_windows(const SynthSpec& spec, const WindowLayout& layout, std::size_t count);

enum class SplitMode { chronological, shuffled };

struct WindowSplit {
  std::vector<EpisodeWindow> train;
  std::vector<EpisodeWindow> eval;
};

/// Train count is floor(ratio * n), clamped to [1, n-1]. Chronological mode
/// puts the earliest windows in train; shuffled mode uses `seed`.
WindowSplit train_eval_split(std::vector<EpisodeWindow> windows, double ratio, std::uint64_t seed,
                             SplitMode mode = SplitMode::chronological);

}  // namespace execq
