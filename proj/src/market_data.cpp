#include "execq/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include <spdlog/spdlog.h>

#include "execq/error.hpp"

namespace execq {
namespace {

constexpr std::string_view kHeader = "timestamp_s,midprice";
constexpr std::int64_t kSecondsPerDay = 86400;

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

template <class T>
bool parse_field(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::span<const double> EpisodeWindow::path(int from_s, int to_s) const {
  if (to_s < from_s) throw ArgumentError("EpisodeWindow::path: empty range");
  const auto first = static_cast<std::size_t>(lead_seconds + from_s);
  const auto count = static_cast<std::size_t>(to_s - from_s) + 1;
  if (lead_seconds + from_s < 0 || first + count > prices.size())
    throw ArgumentError("EpisodeWindow::path: range outside window");
  return std::span<const double>(prices).subspan(first, count);
}

PriceSeries parse_price_series(std::istream& in, std::string instrument, const LoadOptions& opts) {
  PriceSeries series;
  series.instrument = std::move(instrument);

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim_cr(line);
    if (!header_seen) {
      if (row != kHeader) throw ParseError(line_no, "expected header '" + std::string(kHeader) + "'");
      header_seen = true;
      continue;
    }
    if (row.empty()) continue;

    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected two comma-separated fields");
    PricePoint pt;
    if (!parse_field(row.substr(0, comma), pt.timestamp)) throw ParseError(line_no, "bad timestamp");
    if (!parse_field(row.substr(comma + 1), pt.midprice)) throw ParseError(line_no, "bad midprice");
    if (!std::isfinite(pt.midprice) || pt.midprice <= 0.0)
      throw ParseError(line_no, "midprice must be positive and finite");

    if (!series.points.empty()) {
      const PricePoint& last = series.points.back();
      if (pt.timestamp < last.timestamp)
        throw ValidationError("non-monotone timestamp at line " + std::to_string(line_no));
      if (pt.timestamp == last.timestamp) {
        // duplicate second: keep the last value seen
        series.points.back().midprice = pt.midprice;
        continue;
      }
      const std::int64_t missing = pt.timestamp - last.timestamp - 1;
      if (missing > 0 && missing <= opts.max_fill_gap_s) {
        const double fill = last.midprice;
        const std::int64_t from = last.timestamp;
        for (std::int64_t s = 1; s <= missing; ++s) {
          series.points.push_back({from + s, fill});
          series.filled.push_back(1);
        }
        series.filled_count += static_cast<std::size_t>(missing);
      }
    }
    series.points.push_back(pt);
    series.filled.push_back(0);
  }
  if (!header_seen) throw ParseError(1, "missing header");
  if (series.points.size() < 2) throw ValidationError("price series needs at least 2 points");
  if (series.filled_count > 0)
    spdlog::debug("{}: forward-filled {} missing seconds", series.instrument, series.filled_count);
  return series;
}

PriceSeries load_price_series(const std::filesystem::path& path, std::string instrument, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open price file " + path.string());
  return parse_price_series(in, std::move(instrument), opts);
}

std::string format_price(double price) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, price);
  if (ec != std::errc()) throw ArgumentError("unformattable price");
  return std::string(buf, ptr);
}

void write_price_series(std::ostream& out, const PriceSeries& series) {
  out << kHeader << '\n';
  for (const PricePoint& p : series.points) out << p.timestamp << ',' << format_price(p.midprice) << '\n';
}

std::string civil_date(std::int64_t days_since_epoch) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{days_since_epoch}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

SliceResult slice_windows(const PriceSeries& series, const WindowLayout& layout, const SliceOptions& opts) {
  if (layout.periods < 1 || layout.seconds_per_period < 1 || layout.lead_seconds < 1 || layout.terminal_seconds < 1)
    throw ArgumentError("slice_windows: invalid window layout");

  SliceResult result;
  const auto& pts = series.points;
  if (pts.empty()) return result;

  std::vector<std::int64_t> days;
  for (const PricePoint& p : pts) {
    const std::int64_t d = floor_div(p.timestamp + opts.utc_offset_s, kSecondsPerDay);
    if (days.empty() || days.back() != d) days.push_back(d);
  }

  const std::size_t n = layout.point_count();
  for (std::int64_t day : days) {
    const std::string date = civil_date(day);
    for (int hour : opts.hours) {
      const std::string hour_label = std::to_string(hour);
      const std::int64_t t0 = day * kSecondsPerDay + std::int64_t{hour} * 3600 - opts.utc_offset_s;
      const std::int64_t first_ts = t0 - layout.lead_seconds;
      const std::int64_t last_ts = first_ts + static_cast<std::int64_t>(n) - 1;

      auto it = std::lower_bound(pts.begin(), pts.end(), first_ts,
                                 [](const PricePoint& p, std::int64_t t) { return p.timestamp < t; });
      const auto idx = static_cast<std::size_t>(it - pts.begin());
      if (it == pts.end() || it->timestamp != first_ts || idx + n > pts.size() ||
          pts[idx + n - 1].timestamp != last_ts) {
        result.skipped.push_back({date, hour_label, "insufficient data"});
        spdlog::info("skipping window {} hour {}: insufficient data", date, hour_label);
        continue;
      }

      std::size_t filled = 0;
      for (std::size_t i = idx; i < idx + n; ++i) filled += series.filled[i];
      const double fraction = static_cast<double>(filled) / static_cast<double>(n);
      if (fraction > opts.max_gap_fraction) {
        char reason[96];
        std::snprintf(reason, sizeof reason, "filled fraction %.4f exceeds %.4f", fraction, opts.max_gap_fraction);
        result.skipped.push_back({date, hour_label, reason});
        spdlog::info("skipping window {} hour {}: {}", date, hour_label, reason);
        continue;
      }

      EpisodeWindow w;
      w.date = date;
      w.hour_label = hour_label;
      w.start_ts = t0;
      w.lead_seconds = layout.lead_seconds;
      w.prices.reserve(n);
      for (std::size_t i = idx; i < idx + n; ++i) w.prices.push_back(pts[i].midprice);
      result.windows.push_back(std::move(w));
    }
  }
  return result;
}

void write_skip_log(std::ostream& out, std::span<const SkipRecord> skipped) {
  for (const SkipRecord& s : skipped) out << s.date << ',' << s.hour << ',' << s.reason << '\n';
}

SynthModel parse_synth_model(const std::string& name) {
  if (name == "martingale") return SynthModel::martingale;
  if (name == "drift") return SynthModel::drift;
  if (name == "ou") return SynthModel::ou;
  throw ArgumentError("unknown synthetic model '" + name + "'");
}

std::string to_string(SynthModel model) {
  switch (model) {
    case SynthModel::martingale: return "martingale";
    case SynthModel::drift: return "drift";
    case SynthModel::ou: return "ou";
  }
  return "martingale";
}

PriceSeries synth_series(const SynthSpec& spec, std::size_t length, std::int64_t start_ts) {
  if (!(spec.vol >= 0.0)) throw ArgumentError("synth_series: vol must be non-negative");
  if (length < 2) throw ArgumentError("synth_series: length must be at least 2");
  if (!(spec.p0 > 0.0)) throw ArgumentError("synth_series: p0 must be positive");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> shock(0.0, 1.0);

  PriceSeries s;
  s.instrument = "SYN";
  s.points.reserve(length);
  s.filled.assign(length, 0);
  double p = spec.p0;
  s.points.push_back({start_ts, p});
  for (std::size_t t = 1; t < length; ++t) {
    double dp = spec.vol * shock(rng);
    switch (spec.model) {
      case SynthModel::martingale: break;
      case SynthModel::drift: dp += spec.mu; break;
      case SynthModel::ou: dp += spec.kappa * (spec.pbar - p); break;
    }
    p += dp;
    if (!(p > 0.0)) throw DomainError("synth_series: generated a non-positive price");
    s.points.push_back({start_ts + static_cast<std::int64_t>(t), p});
  }
  return s;
}

std::vector<EpisodeWindow> synth_windows(const SynthSpec& spec, const WindowLayout& layout, std::size_t count) {
  std::vector<EpisodeWindow> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::uint32_t raw[2];
    seq.generate(raw, raw + 2);

    SynthSpec s = spec;
    s.seed = (std::uint64_t{raw[0]} << 32) | raw[1];
    const std::int64_t base = static_cast<std::int64_t>(i) * kSecondsPerDay;
    PriceSeries series = synth_series(s, layout.point_count(), base);

    char id[32];
    std::snprintf(id, sizeof id, "synthetic-%05zu", i);
    EpisodeWindow w;
    w.date = id;
    w.hour_label = "synthetic";
    w.start_ts = base + layout.lead_seconds;
    w.lead_seconds = layout.lead_seconds;
    w.prices.reserve(series.size());
    for (const PricePoint& p : series.points) w.prices.push_back(p.midprice);
    out.push_back(std::move(w));
  }
  return out;
}

WindowSplit train_eval_split(std::vector<EpisodeWindow> windows, double ratio, std::uint64_t seed, SplitMode mode) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("train_eval_split: ratio must lie in (0, 1)");
  if (windows.size() < 2) throw ValidationError("train_eval_split: need at least 2 windows");

  const auto chrono_less = [](const EpisodeWindow& a, const EpisodeWindow& b) {
    return a.start_ts < b.start_ts;
  };
  std::stable_sort(windows.begin(), windows.end(), chrono_less);
  if (mode == SplitMode::shuffled) {
    std::mt19937_64 rng(seed);
    std::shuffle(windows.begin(), windows.end(), rng);
  }

  const std::size_t n = windows.size();
  auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  WindowSplit split;
  split.train.assign(std::make_move_iterator(windows.begin()),
                     std::make_move_iterator(windows.begin() + static_cast<std::ptrdiff_t>(n_train)));
  split.eval.assign(std::make_move_iterator(windows.begin() + static_cast<std::ptrdiff_t>(n_train)),
                    std::make_move_iterator(windows.end()));
  return split;
}

}  // namespace execq
