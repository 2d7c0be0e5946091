#include "pnarm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnarm/mcmc.hpp"

namespace pnarm {

CountSeries simulate(const SimSpec& spec, SimDiagnostics* diagnostics) {
  Rng rng(spec.seed);
  return simulate(spec, rng, diagnostics);
}

CountSeries simulate(const SimSpec& spec, Rng& rng, SimDiagnostics* diagnostics) {
  const Network& net = spec.network;
  const std::size_t n = net.size();
  if (spec.partition.size() != n) throw std::invalid_argument("labels must cover every node");
  if (spec.thetas.size() != spec.partition.clusters()) {
    throw std::invalid_argument("need exactly one coefficient triple per cluster");
  }
  if (spec.steps < 1) throw std::invalid_argument("need at least one time step");
  for (const auto& th : spec.thetas) {
    for (double v : th) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("coefficients must be nonnegative");
    }
  }

  // v does not depend on the counts, so take it from a one-step dummy series.
  const Predictors base =
      build_predictors(CountSeries(Matrix<std::int64_t>(n, 1, 0)), net, spec.mode, spec.scale);
  const std::vector<double>& v = base.v;

  Matrix<std::int64_t> y(n, spec.steps, 0);
  SimDiagnostics diag;
  if (spec.y_init) {
    if (spec.y_init->size() != n) throw std::invalid_argument("y_init length must equal node count");
    for (std::size_t i = 0; i < n; ++i) {
      if ((*spec.y_init)[i] < 0) throw std::invalid_argument("y_init must be nonnegative");
      y(i, 0) = (*spec.y_init)[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) = rng.poisson(spec.thetas[static_cast<std::size_t>(spec.partition.label(i))][0] * v[i]);
    }
  }

  std::vector<double> previous(n);
  for (std::size_t t = 1; t < spec.steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) previous[i] = static_cast<double>(y(i, t - 1));
    const auto lag = network_lag(net, previous, spec.mode);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& theta = spec.thetas[static_cast<std::size_t>(spec.partition.label(i))];
      const double rate = conditional_mean(theta, v[i], lag[i], previous[i]);
      diag.max_rate = std::max(diag.max_rate, rate);
      if (!std::isfinite(rate)) throw std::overflow_error("simulated rate overflowed");
      y(i, t) = rng.poisson(rate);
    }
  }
  diag.explosive = diag.max_rate > kExplosiveRate;
  if (diagnostics) *diagnostics = diag;
  return CountSeries(std::move(y), net.node_ids());
}

PartitionState simulate_prior_partition(const PartitionPrior& prior, std::size_t nodes, Rng& rng) {
  return PartitionState::from_labels(sample_prior_labels(prior, nodes, rng));
}

}  // namespace pnarm
