#include "reference.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace execq::testing {
namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

double loss_at(const QNetworkParams& p, std::span<const std::vector<double>> inputs, std::span<const double> targets) {
  double loss = 0.0;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const double d = targets[j] - forward(p, inputs[j]);
    loss += d * d;
  }
  return loss;
}

}  // namespace

Rational::Rational(__int128 num, __int128 den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
}

Rational Rational::operator+(const Rational& o) const { return {num_ * o.den_ + o.num_ * den_, den_ * o.den_}; }
Rational Rational::operator-(const Rational& o) const { return {num_ * o.den_ - o.num_ * den_, den_ * o.den_}; }
Rational Rational::operator*(const Rational& o) const { return {num_ * o.num_, den_ * o.den_}; }
Rational Rational::operator/(const Rational& o) const { return {num_ * o.den_, den_ * o.num_}; }

ReferenceStats reference_summary(std::span<const std::int64_t> data) {
  const auto n = static_cast<std::int64_t>(data.size());
  ReferenceStats r;

  // median by rank counting
  auto kth = [&](std::int64_t k) {
    for (std::int64_t v : data) {
      std::int64_t less = 0, equal = 0;
      for (std::int64_t w : data) {
        less += w < v;
        equal += w == v;
      }
      if (less <= k && k < less + equal) return v;
    }
    throw std::logic_error("rank not found");
  };
  r.median = n % 2 == 1 ? Rational(kth(n / 2)) : Rational(kth(n / 2 - 1) + kth(n / 2), 2);

  Rational sum;
  for (std::int64_t v : data) sum = sum + Rational(v);
  r.mean = sum / Rational(n);

  long double ss = 0.0L;
  const long double mean = static_cast<long double>(r.mean.to_double());
  for (std::int64_t v : data) ss += (v - mean) * (v - mean);
  r.stddev = n > 1 ? static_cast<double>(std::sqrt(ss / (n - 1))) : 0.0;

  Rational gains, losses;
  std::int64_t ng = 0, nl = 0;
  for (std::int64_t v : data) {
    if (v > 0) {
      gains = gains + Rational(v);
      ++ng;
    }
    if (v < 0) {
      losses = losses + Rational(-v);
      ++nl;
    }
  }
  r.win_probability = Rational(ng, n);
  r.no_gains = ng == 0;
  r.no_losses = ng > 0 && nl == 0;
  r.glr_defined = ng > 0 && nl > 0;
  if (r.glr_defined) r.glr = (gains / Rational(ng)) / (losses / Rational(nl));
  return r;
}

std::vector<double> numeric_gradient(const QNetworkParams& params, std::span<const std::vector<double>> inputs,
                                     std::span<const double> targets, double h) {
  std::vector<double> theta = flatten(params);
  std::vector<double> grad(theta.size());
  QNetworkParams work = params;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    unflatten(work, theta);
    const double up = loss_at(work, inputs, targets);
    theta[i] = saved - h;
    unflatten(work, theta);
    const double down = loss_at(work, inputs, targets);
    theta[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("execq-" + tag + "-" + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("TempDir: could not create a scratch directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace execq::testing
