#include "execq/features.hpp"

#include <cmath>
#include <numbers>

#include "execq/error.hpp"
#include "execq/market_data.hpp"

namespace execq {

FeatureSet parse_feature_set(const std::string& name) {
  if (name == "ti" || name == "TI") return FeatureSet::ti;
  if (name == "tip" || name == "TIP") return FeatureSet::tip;
  if (name == "tipqv" || name == "TIPQV") return FeatureSet::tipqv;
  throw ArgumentError("unknown feature set '" + name + "' (expected ti, tip or tipqv)");
}

std::string to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::ti: return "ti";
    case FeatureSet::tip: return "tip";
    case FeatureSet::tipqv: return "tipqv";
  }
  return "tip";
}

int input_dim(FeatureSet set) noexcept {
  switch (set) {
    case FeatureSet::ti: return 3;
    case FeatureSet::tip: return 4;
    case FeatureSet::tipqv: return 5;
  }
  return 4;
}

void FeatureConfig::validate() const {
  if (q0 <= 0) throw ArgumentError("FeatureConfig: q0 must be positive");
  if (periods < 2) throw ArgumentError("FeatureConfig: need at least 2 periods");
  if (!(price_scale > 0.0) || !std::isfinite(price_scale)) throw ArgumentError("FeatureConfig: price scale must be > 0");
  if (!(qv_std > 0.0) || !std::isfinite(qv_std)) throw ArgumentError("FeatureConfig: qv std must be > 0");
}

double transform_time(int k, int periods) {
  if (periods < 2) throw ArgumentError("transform_time: need at least 2 periods");
  if (k < 0 || k > periods - 1) throw ArgumentError("transform_time: period index out of range");
  return 2.0 * k / (periods - 1) - 1.0;
}

double transform_price(double p, double p_hour, double scale) {
  if (!(scale > 0.0)) throw ArgumentError("transform_price: scale must be positive");
  return (p - p_hour) / scale;
}

double compute_qv(std::span<const double> prices) {
  if (prices.size() < 2) throw ArgumentError("compute_qv: need at least 2 prices");
  double qv = 0.0;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    const double d = prices[i] - prices[i - 1];
    qv += d * d;
  }
  return qv;
}

double standardize_qv(double qv, double mean, double stddev) {
  if (!(stddev > 0.0)) throw ArgumentError("standardize_qv: std must be positive");
  return (qv - mean) / (2.0 * stddev);
}

std::pair<double, double> transform_inventory_action(double q, double x, double q0) {
  if (!(q > 0.0) || q > q0) throw DomainError("transform_inventory_action: need 0 < q <= q0");
  if (x < 0.0 || x > q) throw DomainError("transform_inventory_action: need 0 <= x <= q");

  const double qh = q / q0 - 1.0;  // in (-1, 0]
  const double xh = x / q0;        // in [0, 1]
  if (qh == 0.0 && xh == 0.0) return {0.0, 0.0};

  constexpr double quarter_pi = std::numbers::pi / 4.0;
  const double r = std::hypot(qh, xh);
  double theta = 0.0;
  double r_tilde = 0.0;
  if (qh == 0.0) {
    // limit of the upper branch as the ratio blows up
    theta = std::numbers::pi / 2.0;
    const double c = std::cos(theta - quarter_pi);
    r_tilde = r * std::sqrt(2.0 * c * c);
  } else {
    const double zeta = -xh / qh;
    theta = std::atan(zeta);
    if (theta <= quarter_pi) {
      const double c = std::cos(quarter_pi - theta);
      r_tilde = r * std::sqrt((zeta * zeta + 1.0) * (2.0 * c * c));
    } else {
      const double c = std::cos(theta - quarter_pi);
      r_tilde = r * std::sqrt((1.0 / (zeta * zeta) + 1.0) * (2.0 * c * c));
    }
  }
  return {-r_tilde * std::cos(theta), r_tilde * std::sin(theta)};
}

FeatureVector build_state_vector(const RawState& raw, int x, const FeatureConfig& cfg, FeatureSet set) {
  FeatureVector v;
  v.dim = input_dim(set);
  v.values[0] = transform_time(raw.k, cfg.periods);
  const auto [qt, xt] = transform_inventory_action(raw.q, x, cfg.q0);
  v.values[1] = qt;
  v.values[2] = xt;
  if (set != FeatureSet::ti) v.values[3] = transform_price(raw.p, raw.p_hour, cfg.price_scale);
  if (set == FeatureSet::tipqv) v.values[4] = standardize_qv(raw.qv_prev, cfg.qv_mean, cfg.qv_std);
  return v;
}

double previous_period_qv(const EpisodeWindow& window, int k, int seconds_per_period) {
  if (k == 0) return compute_qv(window.lead_path());
  return compute_qv(window.path((k - 1) * seconds_per_period, k * seconds_per_period));
}

FeatureConfig fit_feature_config(std::span<const EpisodeWindow> windows, int q0, int periods,
                                 int seconds_per_period) {
  FeatureConfig cfg;
  cfg.q0 = q0;
  cfg.periods = periods;
  if (windows.empty()) return cfg;

  // Welford accumulators
  double pm = 0.0, ps = 0.0, qm = 0.0, qs = 0.0;
  std::size_t n = 0;
  for (const EpisodeWindow& w : windows) {
    const double p_hour = w.hour_start_price();
    for (int k = 0; k < periods; ++k) {
      const double dev = w.price_at(k * seconds_per_period) - p_hour;
      const double qv = previous_period_qv(w, k, seconds_per_period);
      ++n;
      const double d1 = dev - pm;
      pm += d1 / static_cast<double>(n);
      ps += d1 * (dev - pm);
      const double d2 = qv - qm;
      qm += d2 / static_cast<double>(n);
      qs += d2 * (qv - qm);
    }
  }
  const double price_std = n > 1 ? std::sqrt(ps / static_cast<double>(n - 1)) : 0.0;
  const double qv_std = n > 1 ? std::sqrt(qs / static_cast<double>(n - 1)) : 0.0;
  constexpr double tiny = 1e-12;
  cfg.price_scale = price_std > tiny ? 2.0 * price_std : 1.0;
  cfg.qv_mean = qm;
  cfg.qv_std = qv_std > tiny ? qv_std : 1.0;
  return cfg;
}

}  // namespace execq
