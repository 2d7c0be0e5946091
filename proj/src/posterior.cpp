#include "pnarm/posterior.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pnarm/kernels.hpp"

namespace pnarm {

Matrix<double> cocluster_matrix(std::span<const PosteriorDraw> draws) {
  if (draws.empty()) throw std::invalid_argument("co-clustering needs at least one draw");
  const std::size_t n = draws.front().partition.size();
  Matrix<std::uint32_t> counts(n, n, 0);
  std::vector<std::int32_t> labels(n);
  const auto& k = kernels::active();
  for (const auto& d : draws) {
    if (d.partition.size() != n) throw std::invalid_argument("draws disagree on node count");
    for (std::size_t i = 0; i < n; ++i) labels[i] = d.partition.label(i);
    k.accumulate_cocluster(labels.data(), n, counts.data());
  }
  Matrix<double> c(n, n);
  const double m = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c(i, j) = counts(i, j) / m;
  }
  return c;
}

double least_squares_loss(const PartitionState& partition, const Matrix<double>& c_hat) {
  const std::size_t n = partition.size();
  if (c_hat.rows() != n || c_hat.cols() != n) throw std::invalid_argument("c_hat shape mismatch");
  std::vector<std::int32_t> labels(partition.labels().begin(), partition.labels().end());
  // The diagonal terms are (1 - c_ii)^2 = 0 for a proper co-clustering matrix
  // but are excluded explicitly for arbitrary inputs.
  double diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag += (1.0 - c_hat(i, i)) * (1.0 - c_hat(i, i));
  return kernels::active().ls_loss(labels.data(), c_hat.data(), n) - diag;
}

LeastSquaresPartition least_squares_partition(std::span<const PosteriorDraw> draws,
                                              const Matrix<double>& c_hat) {
  if (draws.empty()) throw std::invalid_argument("least squares partition needs draws");
  LeastSquaresPartition best;
  best.loss = least_squares_loss(draws[0].partition, c_hat);
  for (std::size_t m = 1; m < draws.size(); ++m) {
    const double loss = least_squares_loss(draws[m].partition, c_hat);
    // Losses equal up to rounding count as ties, so the choice does not
    // depend on the kernel's summation order.
    if (loss < best.loss - 1e-12 * std::max(1.0, best.loss)) {
      best.loss = loss;
      best.index = m;
    }
  }
  best.partition = draws[best.index].partition;
  return best;
}

LagInputs lag_inputs_at(const CountSeries& counts, const Predictors& predictors,
                        const Network& net, std::size_t t) {
  const std::size_t steps = counts.steps();
  if (t < 2 || t > steps + 1) throw std::out_of_range("forecast target time outside {2..T+1}");
  const std::size_t n = counts.nodes();
  LagInputs in;
  in.v = predictors.v;
  in.y_lag.resize(n);
  for (std::size_t i = 0; i < n; ++i) in.y_lag[i] = static_cast<double>(counts.at(i, t - 1));
  if (t <= steps && predictors.x.cols() >= t - 1) {
    in.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) in.x[i] = predictors.x(i, t - 2);
  } else {
    in.x = network_lag(net, in.y_lag, predictors.mode);
  }
  return in;
}

PredictiveDistribution::PredictiveDistribution(Matrix<double> rates, std::vector<double> weights)
    : rates_(std::move(rates)), weights_(std::move(weights)) {
  if (weights_.size() != rates_.cols() || weights_.empty()) {
    throw std::invalid_argument("mixture weights must match the component count");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
  for (std::size_t i = 0; i < rates_.rows(); ++i) {
    for (double r : rates_.row(i)) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("rates must be nonnegative");
    }
  }
}

double PredictiveDistribution::pmf(std::size_t node, std::int64_t y) const {
  if (y < 0) return 0.0;
  return kernels::active().mixture_pmf(rates_.row(node).data(), weights_.data(), components(),
                                       static_cast<double>(y), log_factorial(y));
}

double poisson_cdf(std::int64_t y, double rate) {
  if (y < 0) return 0.0;
  if (rate == 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(y) + 1.0, rate);
}

double poisson_sf(std::int64_t y, double rate) {
  if (y < 0) return 1.0;
  if (rate == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(y) + 1.0, rate);
}

double PredictiveDistribution::sf(std::size_t node, std::int64_t y) const {
  if (y < 0) return 1.0;
  double q = 0.0;
  const auto r = rates_.row(node);
  for (std::size_t m = 0; m < components(); ++m) q += weights_[m] * poisson_sf(y, r[m]);
  return std::min(q, 1.0);
}

double PredictiveDistribution::cdf(std::size_t node, std::int64_t y) const {
  if (y < 0) return 0.0;
  double p = 0.0;
  const auto r = rates_.row(node);
  for (std::size_t m = 0; m < components(); ++m) p += weights_[m] * poisson_cdf(y, r[m]);
  return std::min(p, 1.0);
}

double PredictiveDistribution::mean(std::size_t node) const {
  const auto r = rates_.row(node);
  return std::inner_product(r.begin(), r.end(), weights_.begin(), 0.0);
}

double PredictiveDistribution::max_rate(std::size_t node) const {
  const auto r = rates_.row(node);
  return *std::max_element(r.begin(), r.end());
}

std::int64_t PredictiveDistribution::quantile(std::size_t node, double level) const {
  if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile level outside [0,1]");
  // Bisection on the monotone cdf over [0, hi].
  const double top = max_rate(node);
  std::int64_t hi = static_cast<std::int64_t>(std::ceil(top + 40.0 * std::sqrt(top) + 60.0));
  while (cdf(node, hi) < level && hi < (std::int64_t{1} << 52)) hi *= 2;
  std::int64_t lo = -1;  // cdf(lo) < level (treating cdf(-1) = 0)
  if (level <= 0.0) return 0;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (cdf(node, mid) >= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

PredictiveDistribution predictive_distribution(std::span<const PosteriorDraw> draws,
                                               const LagInputs& inputs,
                                               std::span<const double> draw_weights) {
  if (draws.empty()) throw std::invalid_argument("predictive distribution needs draws");
  const std::size_t m = draws.size();
  const std::size_t n = inputs.v.size();
  Matrix<double> rates(n, m);
  for (std::size_t k = 0; k < m; ++k) {
    if (draws[k].partition.size() != n) throw std::invalid_argument("draw/node count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      rates(i, k) = conditional_mean(draws[k].theta_of(i), inputs.v[i], inputs.x[i], inputs.y_lag[i]);
    }
  }
  std::vector<double> w;
  if (draw_weights.empty()) {
    w.assign(m, 1.0 / static_cast<double>(m));
  } else {
    if (draw_weights.size() != m) throw std::invalid_argument("one weight per draw required");
    w.assign(draw_weights.begin(), draw_weights.end());
  }
  return PredictiveDistribution(std::move(rates), std::move(w));
}

std::vector<double> expand_chain_weights(std::span<const PosteriorSamples> chains,
                                         std::span<const double> chain_weights) {
  if (chains.size() != chain_weights.size()) throw std::invalid_argument("one weight per chain");
  std::vector<double> w;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::size_t m = chains[c].draws.size();
    if (m == 0) throw std::invalid_argument("chain without draws");
    w.insert(w.end(), m, chain_weights[c] / static_cast<double>(m));
  }
  return w;
}

std::vector<PosteriorDraw> pool_draws(std::span<const PosteriorSamples> chains) {
  std::vector<PosteriorDraw> all;
  for (const auto& c : chains) all.insert(all.end(), c.draws.begin(), c.draws.end());
  return all;
}

}  // namespace pnarm
