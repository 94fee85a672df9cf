#pragma once

// Fully connected Q(s, x) network: affine -> ReLU hidden layers followed by a
// linear scalar head, trained with RMSprop on a summed squared loss.

#include <cstdint>
#include <span>
#include <vector>

namespace execq {

/// Row-major `rows x cols` weights mapping a cols-vector to a rows-vector.
struct DenseLayer {
  int rows = 0;
  int cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(int r, int c) { return weights[static_cast<std::size_t>(r) * cols + c]; }
  double w(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const DenseLayer&) const = default;
};

struct NetworkShape {
  int input_dim = 4;
  int hidden_layers = 6;
  int hidden_units = 20;
};

struct QNetworkParams {
  std::vector<DenseLayer> layers;  // hidden layers then the 1-row head

  int input_dim() const noexcept { return layers.empty() ? 0 : layers.front().cols; }
  std::size_t parameter_count() const noexcept;
  /// Same layer shapes with every value zero.
  QNetworkParams zeros_like() const;
  bool all_finite() const noexcept;
  bool operator==(const QNetworkParams&) const = default;
};

/// Glorot-uniform weights, zero biases; input_dim must be 3, 4 or 5.
QNetworkParams init_network(int input_dim, std::uint64_t seed);
QNetworkParams init_network(const NetworkShape& shape, std::uint64_t seed);

double forward(const QNetworkParams& params, std::span<const double> input);

struct Sample {
  std::span<const double> input;
  double target = 0.0;
};

struct LossAndGradient {
  double loss = 0.0;
  QNetworkParams gradient;
};

/// loss = sum_j (target_j - Q(input_j))^2 and its exact gradient.
LossAndGradient loss_and_gradient(const QNetworkParams& params, std::span<const Sample> batch);

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;
  double epsilon = 1e-8;
};

struct RmsPropState {
  RmsPropConfig config;
  QNetworkParams accumulator;  // running mean of squared gradients

  bool operator==(const RmsPropState& o) const { return accumulator == o.accumulator; }
};

RmsPropState make_rmsprop(const QNetworkParams& params, const RmsPropConfig& config = {});

/// acc <- decay acc + (1 - decay) g^2;  w <- w - lr g / sqrt(acc + eps).
/// Throws TrainingError (leaving params untouched) on a non-finite gradient.
void rmsprop_step(QNetworkParams& params, RmsPropState& state, const QNetworkParams& gradient);

inline QNetworkParams copy_params(const QNetworkParams& src) { return src; }

std::vector<double> flatten(const QNetworkParams& params);
void unflatten(QNetworkParams& params, std::span<const double> values);

}  // namespace execq
