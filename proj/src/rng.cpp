#include "pnarm/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pnarm {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_normal_ = true;
  return u * f;
}

double Rng::gamma(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("gamma: shape and rate must be positive");
  }
  if (a < 1.0) {
    // Boost to shape a + 1 and correct with U^(1/a).
    const double g = gamma(a + 1.0, 1.0);
    return g * std::pow(uniform_open(), 1.0 / a) / b;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / b;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / b;
  }
}

std::int64_t Rng::poisson(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("poisson: rate must be finite and nonnegative");
  }
  if (rate > 1e15) throw std::overflow_error("poisson: rate too large for integer counts");
  if (rate == 0.0) return 0;
  if (rate < 30.0) {
    // Sequential search on the cdf.
    const double u = uniform();
    std::int64_t k = 0;
    double p = std::exp(-rate);
    double cdf = p;
    while (u > cdf) {
      ++k;
      p *= rate / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && cdf < u) break;  // rounding left a sliver above cdf
    }
    return k;
  }
  // PTRS (Hörmann 1993).
  const double smu = std::sqrt(rate);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_rate = std::log(rate);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -rate + k * log_rate - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

std::size_t Rng::categorical(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("categorical: weights must have positive finite sum");
  }
  const double target = uniform() * total;
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    running += weights[k];
    last_positive = k;
    if (target < running) return k;
  }
  return last_positive;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace pnarm
