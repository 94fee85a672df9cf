#pragma once

// Network input features. Every component is mapped to roughly [-1, 1]:
// time affinely, the (inventory, action) pair through a triangle-to-square
// stretch, price relative to the hour start, and quadratic variation by
// standardisation.

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace execq {

struct EpisodeWindow;

enum class FeatureSet { ti, tip, tipqv };

FeatureSet parse_feature_set(const std::string& name);
std::string to_string(FeatureSet set);
/// Network input width: time, inventory, action, then optional price and QV.
int input_dim(FeatureSet set) noexcept;

struct FeatureConfig {
  int q0 = 20;
  int periods = 5;
  double price_scale = 1.0;  // divisor for (p - p_hour)
  double qv_mean = 0.0;
  double qv_std = 1.0;

  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

/// Raw (untransformed) quantities at a decision time.
struct RawState {
  int k = 0;  // period index
  int q = 0;  // remaining inventory, lots
  double p = 0.0;
  double p_hour = 0.0;
  double qv_prev = 0.0;

  bool operator==(const RawState&) const = default;
};

struct FeatureVector {
  std::array<double, 5> values{};
  int dim = 0;

  std::span<const double> view() const noexcept { return {values.data(), static_cast<std::size_t>(dim)}; }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

double transform_time(int k, int periods);
double transform_price(double p, double p_hour, double scale);
/// Sum of squared one-second increments along `prices`.
double compute_qv(std::span<const double> prices);
double standardize_qv(double qv, double mean, double stddev);
/// Maps the valid triangle {0 < q <= q0, 0 <= x <= q} onto [-1, 0] x [0, 1].
std::pair<double, double> transform_inventory_action(double q, double x, double q0);

FeatureVector build_state_vector(const RawState& raw, int x, const FeatureConfig& cfg, FeatureSet set);

/// Quadratic variation of the period preceding decision time k: the lead
/// period for k = 0, otherwise period k - 1.
double previous_period_qv(const EpisodeWindow& window, int k, int seconds_per_period);

/// Fits the price divisor (2 std of p - p_hour at decision times) and the QV
/// mean/std on training windows. Degenerate spreads fall back to 1.
FeatureConfig fit_feature_config(std::span<const EpisodeWindow> windows, int q0, int periods,
                                 int seconds_per_period);

}  // namespace execq
