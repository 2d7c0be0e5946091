#include "pnarm/forecast_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pnarm {

ScoreReport log_score(std::span<const PredictiveDistribution> forecasts,
                      std::span<const std::size_t> times, const CountSeries& observed) {
  if (forecasts.size() != times.size()) throw std::invalid_argument("one forecast per scored time");
  ScoreReport report;
  report.times.assign(times.begin(), times.end());
  const std::size_t n = observed.nodes();
  report.cell_scores = Matrix<double>(n, times.size());
  double total = 0.0;
  std::size_t finite = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (forecasts[k].nodes() != n) throw std::invalid_argument("forecast/node count mismatch");
    if (times[k] < 1 || times[k] > observed.steps()) throw std::out_of_range("scored time outside data");
    for (std::size_t i = 0; i < n; ++i) {
      const double p = forecasts[k].pmf(i, observed.at(i, times[k]));
      const double s = p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
      report.cell_scores(i, k) = s;
      if (std::isfinite(s)) {
        total += s;
        ++finite;
      } else {
        ++report.infinite_cells;
      }
    }
  }
  report.mean_log_score = finite > 0 ? total / static_cast<double>(finite)
                                     : std::numeric_limits<double>::infinity();
  return report;
}

double cdf_difference_score(const PredictiveDistribution& dist, std::size_t node, std::int64_t y) {
  // Difference the smaller tail: P(y) - P(y-1) = Q(y-1) - Q(y) with Q = 1 - P.
  const double below = dist.cdf(node, y - 1);
  if (below <= 0.5) return -std::log(dist.cdf(node, y) - below);
  return -std::log(dist.sf(node, y - 1) - dist.sf(node, y));
}

MaseReport mase(std::span<const double> forecasts, std::span<const double> truth,
                const CountSeries& training) {
  const std::size_t n = training.nodes();
  const std::size_t steps = training.steps();
  if (steps < 3) throw std::invalid_argument("MASE needs at least 3 training steps");
  if (forecasts.size() != n || truth.size() != n) throw std::invalid_argument("MASE: size mismatch");
  MaseReport r;
  r.scaled_errors.resize(n);
  double total = 0.0;
  std::size_t defined = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double naive = 0.0;
    for (std::size_t t = 2; t <= steps; ++t) {
      naive += std::abs(static_cast<double>(training.at(i, t) - training.at(i, t - 1)));
    }
    naive /= static_cast<double>(steps - 1);
    if (naive == 0.0) {
      ++r.undefined_nodes;
      continue;
    }
    const double e = std::abs(truth[i] - forecasts[i]) / naive;
    r.scaled_errors[i] = e;
    total += e;
    ++defined;
  }
  if (defined == 0) throw std::domain_error("MASE undefined: every training series is constant");
  r.mean = total / static_cast<double>(defined);
  return r;
}

double randomized_pit(double cdf_below, double cdf_at, Rng& rng) {
  return cdf_below + (cdf_at - cdf_below) * rng.uniform();
}

double randomized_pit(const PredictiveDistribution& dist, std::size_t node, std::int64_t y,
                      Rng& rng) {
  if (y < 0) throw std::invalid_argument("PIT needs a nonnegative count");
  return randomized_pit(dist.cdf(node, y - 1), dist.cdf(node, y), rng);
}

std::vector<std::size_t> pit_histogram(std::span<const double> u, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  for (double x : u) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("PIT value outside [0,1]");
    auto b = static_cast<std::size_t>(x * static_cast<double>(bins));
    ++counts[std::min(b, bins - 1)];
  }
  return counts;
}

double stacking_objective(const Matrix<double>& density, std::span<const double> weights) {
  double obj = 0.0;
  for (std::size_t r = 0; r < density.rows(); ++r) {
    double mix = 0.0;
    for (std::size_t c = 0; c < density.cols(); ++c) mix += weights[c] * density(r, c);
    obj += std::log(mix);
  }
  return obj;
}

StackingResult stacking_weights(const Matrix<double>& density, double tolerance,
                                std::size_t max_iterations) {
  const std::size_t cells = density.rows();
  const std::size_t chains = density.cols();
  if (chains == 0) throw std::invalid_argument("stacking needs at least one chain");
  if (cells == 0) throw std::invalid_argument("stacking needs validation cells");
  for (std::size_t r = 0; r < cells; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < chains; ++c) {
      if (!(density(r, c) >= 0.0) || !std::isfinite(density(r, c))) {
        throw std::invalid_argument("stacking densities must be finite and nonnegative");
      }
      total += density(r, c);
    }
    if (total <= 0.0) {
      throw std::domain_error("validation cell " + std::to_string(r) + " has zero mass under every chain");
    }
  }

  StackingResult result;
  result.weights.assign(chains, 1.0 / static_cast<double>(chains));
  result.objective = stacking_objective(density, result.weights);
  if (chains == 1) return result;

  std::vector<double> next(chains);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < cells; ++r) {
      double mix = 0.0;
      for (std::size_t c = 0; c < chains; ++c) mix += result.weights[c] * density(r, c);
      for (std::size_t c = 0; c < chains; ++c) next[c] += result.weights[c] * density(r, c) / mix;
    }
    double total = 0.0;
    for (double& w : next) {
      w /= static_cast<double>(cells);
      total += w;
    }
    for (double& w : next) w /= total;
    result.weights = next;
    const double obj = stacking_objective(density, result.weights);
    const double change = std::abs(obj - result.objective);
    result.objective = obj;
    result.iterations = it;
    if (change <= tolerance * std::max(1.0, std::abs(obj))) break;
  }
  return result;
}

KsResult ks_uniform(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("KS test needs data");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double u = std::clamp(sample[k], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(k) + 1.0) / n - u, u - static_cast<double>(k) / n});
  }
  // Asymptotic Kolmogorov distribution with the Stephens small-sample factor.
  const double root = std::sqrt(n);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  double p = 0.0;
  if (lambda <= 0.0) {
    p = 1.0;
  } else if (lambda < 1.18) {
    // The alternating series converges slowly here; use the Jacobi theta form
    // of the Kolmogorov cdf instead.
    const double pi = 3.14159265358979323846;
    const double x = -pi * pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::exp(static_cast<double>((2 * k - 1) * (2 * k - 1)) * x);
      cdf += term;
      if (term < 1e-17 * cdf) break;
    }
    p = 1.0 - std::sqrt(2.0 * pi) / lambda * cdf;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      p += (k % 2 == 1 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

}  // namespace pnarm
