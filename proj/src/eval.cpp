#include "execq/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "execq/error.hpp"

namespace execq {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// linear-interpolation quantile on sorted data
double quantile_sorted(const std::vector<double>& s, double prob) {
  const double pos = prob * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

std::string glr_status_name(GlrStatus s) {
  switch (s) {
    case GlrStatus::defined: return "defined";
    case GlrStatus::no_losses: return "no_losses";
    case GlrStatus::no_gains: return "no_gains";
  }
  return "defined";
}

GlrStatus parse_glr_status(const std::string& s) {
  if (s == "defined") return GlrStatus::defined;
  if (s == "no_losses") return GlrStatus::no_losses;
  if (s == "no_gains") return GlrStatus::no_gains;
  throw DataError("unknown glr_status '" + s + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace

std::vector<int> twap_schedule(int q0, int periods) {
  if (periods < 1) throw ArgumentError("twap_schedule: need at least one period");
  if (q0 < 0) throw ArgumentError("twap_schedule: negative inventory");
  std::vector<int> xs(static_cast<std::size_t>(periods), q0 / periods);
  for (int i = 0; i < q0 % periods; ++i) ++xs[static_cast<std::size_t>(i)];
  return xs;
}

ActionSource twap_policy(const EnvConfig& env) {
  std::vector<int> units = twap_schedule(env.q0 / env.lot_multiple, env.periods);
  for (int& u : units) u *= env.lot_multiple;
  return [units = std::move(units), strict = env.strict_terminal, last = env.periods - 1](const EpisodeState& s) {
    if (strict && s.k == last) return s.q;
    return std::min(units[static_cast<std::size_t>(s.k)], s.q);
  };
}

ActionSource greedy_policy(const QNetworkParams& params, const ModelContext& ctx) {
  return [params, ctx](const EpisodeState& s) { return select_greedy(params, s.raw(), ctx); };
}

PolicyRun run_policy(const ActionSource& policy, const EpisodeWindow& window, const EnvConfig& env) {
  PolicyRun run;
  EpisodeState state = reset(window, env);
  const int m = env.seconds_per_period;
  for (int k = 0; k < env.periods; ++k) {
    const int x = state.q > 0 ? policy(state) : 0;
    const double child = static_cast<double>(x) / m;
    const double penalty = env.penalty_a * child * child;
    for (int i = 0; i < m; ++i) run.pnl += child * window.price_at(k * m + i) - penalty;
    run.actions.push_back(x);
    state = step(state, x, env).next;
  }
  run.q_left = state.q;
  if (state.q > 0) {
    const double q = state.q;
    run.pnl += q * window.price_at(env.periods * m) - env.penalty_a * q * q;
  }
  return run;
}

double delta_pnl(double model_pnl, double twap_pnl) {
  if (twap_pnl == 0.0) throw DomainError("delta_pnl: TWAP P&L is zero");
  return (model_pnl - twap_pnl) / twap_pnl * 1e4;
}

SummaryStats summarize(std::span<const double> delta_bps) {
  if (delta_bps.empty()) throw ArgumentError("summarize: no results");
  SummaryStats st;
  st.count = delta_bps.size();
  const double n = static_cast<double>(st.count);

  std::vector<double> sorted(delta_bps.begin(), delta_bps.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  st.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  double sum = 0.0;
  for (double d : delta_bps) sum += d;
  st.mean = sum / n;
  double ss = 0.0;
  for (double d : delta_bps) ss += (d - st.mean) * (d - st.mean);
  st.stddev = st.count > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  double gain = 0.0, loss = 0.0;
  std::size_t n_gain = 0, n_loss = 0;
  for (double d : delta_bps) {
    if (d > 0.0) {
      gain += d;
      ++n_gain;
    } else if (d < 0.0) {
      loss += -d;
      ++n_loss;
    }
  }
  st.win_probability = static_cast<double>(n_gain) / n;
  if (n_gain == 0) {
    st.glr = 0.0;
    st.glr_status = GlrStatus::no_gains;
  } else if (n_loss == 0) {
    st.glr = std::numeric_limits<double>::infinity();
    st.glr_status = GlrStatus::no_losses;
  } else {
    st.glr = (gain / static_cast<double>(n_gain)) / (loss / static_cast<double>(n_loss));
  }
  return st;
}

SummaryStats summarize(std::span<const HourResult> results) {
  std::vector<double> d;
  d.reserve(results.size());
  for (const HourResult& r : results) d.push_back(r.delta_bps);
  return summarize(d);
}

Histogram freedman_diaconis(std::span<const double> values) {
  Histogram h;
  if (values.empty()) return h;
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double lo = s.front();
  const double hi = s.back();
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));

  constexpr std::size_t max_bins = 10000;
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) {
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::clamp<std::size_t>(bins, 1, max_bins);
    if (bins == max_bins) width = (hi - lo) / static_cast<double>(bins);
  } else {
    width = hi > lo ? hi - lo : 1.0;
  }
  h.bin_width = width;
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + width * static_cast<double>(i));
  h.counts.assign(bins, 0);
  for (double v : s) {
    auto idx = static_cast<std::size_t>(std::floor((v - lo) / width));
    ++h.counts[std::min(idx, bins - 1)];
  }
  return h;
}

nlohmann::json to_json(const SummaryStats& st) {
  nlohmann::json j;
  j["count"] = st.count;
  j["median"] = st.median;
  j["mean"] = st.mean;
  j["std"] = st.stddev;
  j["glr"] = std::isfinite(st.glr) ? nlohmann::json(st.glr) : nlohmann::json(nullptr);
  j["glr_status"] = glr_status_name(st.glr_status);
  j["win_probability"] = st.win_probability;
  return j;
}

SummaryStats summary_from_json(const nlohmann::json& j) {
  SummaryStats st;
  st.count = j.at("count").get<std::size_t>();
  st.median = j.at("median").get<double>();
  st.mean = j.at("mean").get<double>();
  st.stddev = j.at("std").get<double>();
  st.glr_status = parse_glr_status(j.at("glr_status").get<std::string>());
  st.glr = j.at("glr").is_null() ? std::numeric_limits<double>::infinity() : j.at("glr").get<double>();
  st.win_probability = j.at("win_probability").get<double>();
  return st;
}

nlohmann::json to_json(const FeatureConfig& cfg) {
  return {{"q0", cfg.q0},
          {"periods", cfg.periods},
          {"price_scale", cfg.price_scale},
          {"qv_mean", cfg.qv_mean},
          {"qv_std", cfg.qv_std}};
}

FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig cfg;
  cfg.q0 = j.at("q0").get<int>();
  cfg.periods = j.at("periods").get<int>();
  cfg.price_scale = j.at("price_scale").get<double>();
  cfg.qv_mean = j.at("qv_mean").get<double>();
  cfg.qv_std = j.at("qv_std").get<double>();
  cfg.validate();
  return cfg;
}

ReportFiles report_files(const std::filesystem::path& dir) {
  return {dir / "summary.json", dir / "hourly.csv", dir / "delta_hist.csv"};
}

void emit_report(const SummaryStats& stats, std::span<const HourResult> results, const ReportFiles& files,
                 const std::optional<FeatureConfig>& features) {
  std::vector<double> deltas;
  std::map<std::string, std::vector<double>> by_hour;
  for (const HourResult& r : results) {
    deltas.push_back(r.delta_bps);
    by_hour[r.hour].push_back(r.delta_bps);
  }
  const Histogram hist = freedman_diaconis(deltas);

  nlohmann::json j;
  j["schema"] = "execq.report";
  j["version"] = 1;
  j["pooled"] = to_json(stats);
  nlohmann::json per_hour = nlohmann::json::object();
  for (const auto& [hour, d] : by_hour) per_hour[hour] = to_json(summarize(d));
  j["per_hour"] = per_hour;
  j["histogram"] = {{"method", "freedman-diaconis"}, {"bin_width", hist.bin_width}, {"bins", hist.counts.size()}};
  if (features) j["feature_config"] = to_json(*features);
  {
    auto out = open_out(files.summary_json);
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_out(files.hourly_csv);
    out << "date,hour,model_pnl,twap_pnl,delta_bps\n";
    for (const HourResult& r : results)
      out << r.date << ',' << r.hour << ',' << fmt_double(r.model_pnl) << ',' << fmt_double(r.twap_pnl) << ','
          << fmt_double(r.delta_bps) << '\n';
  }
  {
    auto out = open_out(files.histogram_csv);
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
      out << fmt_double(hist.edges[i]) << ',' << fmt_double(hist.edges[i + 1]) << ',' << hist.counts[i] << '\n';
  }
}

std::vector<std::filesystem::path> write_policy_grid(const PolicyGrid& grid, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (std::size_t pb = 0; pb < grid.price_levels.size(); ++pb) {
    for (std::size_t vb = 0; vb < grid.qv_levels.size(); ++vb) {
      char name[64];
      std::snprintf(name, sizeof name, "policy_p%zu_v%zu.csv", pb, vb);
      const auto path = dir / name;
      auto out = open_out(path);
      out << "k,q,price_bucket,qv_bucket,action\n";
      for (const PolicyCell& c : grid.cells) {
        if (c.price_bucket != static_cast<int>(pb) || c.qv_bucket != static_cast<int>(vb)) continue;
        out << c.k << ',' << c.q << ',' << c.price_bucket << ',' << c.qv_bucket << ',' << c.action << '\n';
      }
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace execq
