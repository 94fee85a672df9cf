#include "execq/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "execq/error.hpp"

namespace execq {
namespace {

void check_shape(const NetworkShape& shape) {
  if (shape.input_dim < 1 || shape.hidden_layers < 1 || shape.hidden_units < 1)
    throw ArgumentError("network shape must have positive dimensions");
}

DenseLayer make_layer(int rows, int cols) {
  DenseLayer l;
  l.rows = rows;
  l.cols = cols;
  l.weights.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  l.bias.assign(static_cast<std::size_t>(rows), 0.0);
  return l;
}

// out = W in + b
void affine(const DenseLayer& l, const double* in, double* out) {
  for (int r = 0; r < l.rows; ++r) {
    const double* row = l.weights.data() + static_cast<std::size_t>(r) * l.cols;
    double acc = l.bias[static_cast<std::size_t>(r)];
    for (int c = 0; c < l.cols; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

}  // namespace

std::size_t QNetworkParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

QNetworkParams QNetworkParams::zeros_like() const {
  QNetworkParams z;
  z.layers.reserve(layers.size());
  for (const DenseLayer& l : layers) z.layers.push_back(make_layer(l.rows, l.cols));
  return z;
}

bool QNetworkParams::all_finite() const noexcept {
  for (const DenseLayer& l : layers) {
    for (double v : l.weights)
      if (!std::isfinite(v)) return false;
    for (double v : l.bias)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

QNetworkParams init_network(int input_dim, std::uint64_t seed) {
  if (input_dim < 3 || input_dim > 5) throw ArgumentError("init_network: input dimension must be 3, 4 or 5");
  return init_network(NetworkShape{input_dim, 6, 20}, seed);
}

QNetworkParams init_network(const NetworkShape& shape, std::uint64_t seed) {
  check_shape(shape);
  std::mt19937_64 rng(seed);
  QNetworkParams p;
  int fan_in = shape.input_dim;
  for (int i = 0; i <= shape.hidden_layers; ++i) {
    const int fan_out = i < shape.hidden_layers ? shape.hidden_units : 1;
    DenseLayer l = make_layer(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& w : l.weights) w = u(rng);
    p.layers.push_back(std::move(l));
    fan_in = fan_out;
  }
  return p;
}

double forward(const QNetworkParams& params, std::span<const double> input) {
  if (params.layers.empty()) throw ArgumentError("forward: empty network");
  if (static_cast<int>(input.size()) != params.input_dim())
    throw ArgumentError("forward: input dimension mismatch");

  thread_local std::vector<double> a, b;
  a.assign(input.begin(), input.end());
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const DenseLayer& l = params.layers[li];
    b.resize(static_cast<std::size_t>(l.rows));
    affine(l, a.data(), b.data());
    if (li != last)
      for (double& v : b) v = std::max(v, 0.0);
    std::swap(a, b);
  }
  return a[0];
}

LossAndGradient loss_and_gradient(const QNetworkParams& params, std::span<const Sample> batch) {
  if (batch.empty()) throw ArgumentError("loss_and_gradient: empty batch");
  if (params.layers.empty()) throw ArgumentError("loss_and_gradient: empty network");

  const std::size_t n_layers = params.layers.size();
  LossAndGradient out;
  out.gradient = params.zeros_like();

  // acts[0] is the input, acts[i+1] the (post-ReLU) output of layer i
  std::vector<std::vector<double>> acts(n_layers + 1);
  std::vector<double> delta, prev_delta;

  for (const Sample& s : batch) {
    if (static_cast<int>(s.input.size()) != params.input_dim())
      throw ArgumentError("loss_and_gradient: input dimension mismatch");
    acts[0].assign(s.input.begin(), s.input.end());
    for (std::size_t li = 0; li < n_layers; ++li) {
      const DenseLayer& l = params.layers[li];
      acts[li + 1].resize(static_cast<std::size_t>(l.rows));
      affine(l, acts[li].data(), acts[li + 1].data());
      if (li + 1 != n_layers)
        for (double& v : acts[li + 1]) v = std::max(v, 0.0);
    }
    const double residual = s.target - acts[n_layers][0];
    out.loss += residual * residual;

    // dL/dQ = -2 (target - Q)
    delta.assign(1, -2.0 * residual);
    for (std::size_t li = n_layers; li-- > 0;) {
      const DenseLayer& l = params.layers[li];
      DenseLayer& g = out.gradient.layers[li];
      const std::vector<double>& in = acts[li];
      for (int r = 0; r < l.rows; ++r) {
        const double d = delta[static_cast<std::size_t>(r)];
        g.bias[static_cast<std::size_t>(r)] += d;
        double* grow = g.weights.data() + static_cast<std::size_t>(r) * l.cols;
        for (int c = 0; c < l.cols; ++c) grow[c] += d * in[static_cast<std::size_t>(c)];
      }
      if (li == 0) break;
      prev_delta.assign(static_cast<std::size_t>(l.cols), 0.0);
      for (int r = 0; r < l.rows; ++r) {
        const double d = delta[static_cast<std::size_t>(r)];
        const double* row = l.weights.data() + static_cast<std::size_t>(r) * l.cols;
        for (int c = 0; c < l.cols; ++c) prev_delta[static_cast<std::size_t>(c)] += row[c] * d;
      }
      // ReLU gate of the layer below; the subgradient at 0 is taken as 0
      for (int c = 0; c < l.cols; ++c)
        if (!(in[static_cast<std::size_t>(c)] > 0.0)) prev_delta[static_cast<std::size_t>(c)] = 0.0;
      std::swap(delta, prev_delta);
    }
  }
  return out;
}

RmsPropState make_rmsprop(const QNetworkParams& params, const RmsPropConfig& config) {
  if (!(config.learning_rate > 0.0)) throw ArgumentError("nn.learning_rate must be positive");
  if (!(config.decay >= 0.0 && config.decay < 1.0)) throw ArgumentError("nn.rms_decay must lie in [0, 1)");
  if (!(config.epsilon > 0.0)) throw ArgumentError("nn.rms_epsilon must be positive");
  return RmsPropState{config, params.zeros_like()};
}

void rmsprop_step(QNetworkParams& params, RmsPropState& state, const QNetworkParams& gradient) {
  if (gradient.layers.size() != params.layers.size() || state.accumulator.layers.size() != params.layers.size())
    throw ArgumentError("rmsprop_step: shape mismatch");
  if (!gradient.all_finite()) throw TrainingError("rmsprop_step: non-finite gradient");

  const double beta = state.config.decay;
  const double lr = state.config.learning_rate;
  const double eps = state.config.epsilon;
  const auto update = [&](std::vector<double>& w, std::vector<double>& acc, const std::vector<double>& g) {
    if (w.size() != g.size() || w.size() != acc.size()) throw ArgumentError("rmsprop_step: shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc[i] = beta * acc[i] + (1.0 - beta) * g[i] * g[i];
      w[i] -= lr * g[i] / std::sqrt(acc[i] + eps);
    }
  };
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    update(params.layers[li].weights, state.accumulator.layers[li].weights, gradient.layers[li].weights);
    update(params.layers[li].bias, state.accumulator.layers[li].bias, gradient.layers[li].bias);
  }
}

std::vector<double> flatten(const QNetworkParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  for (const DenseLayer& l : params.layers) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void unflatten(QNetworkParams& params, std::span<const double> values) {
  if (values.size() != params.parameter_count()) throw ArgumentError("unflatten: size mismatch");
  std::size_t pos = 0;
  for (DenseLayer& l : params.layers) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), l.weights.size(), l.weights.begin());
    pos += l.weights.size();
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), l.bias.size(), l.bias.begin());
    pos += l.bias.size();
  }
}

}  // namespace execq
