#include "pnarm/model.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pnarm/kernels.hpp"

namespace pnarm {

CountSeries::CountSeries(Matrix<std::int64_t> y, std::vector<std::string> node_ids,
                         std::vector<std::string> time_labels)
    : y_(std::move(y)), node_ids_(std::move(node_ids)), time_labels_(std::move(time_labels)) {
  if (y_.rows() == 0 || y_.cols() == 0) throw std::invalid_argument("count series is empty");
  for (std::size_t i = 0; i < y_.rows(); ++i) {
    for (std::int64_t v : y_.row(i)) {
      if (v < 0) throw std::invalid_argument("counts must be nonnegative");
    }
  }
  if (node_ids_.empty()) {
    for (std::size_t i = 0; i < y_.rows(); ++i) node_ids_.push_back(std::to_string(i + 1));
  }
  if (time_labels_.empty()) {
    for (std::size_t t = 0; t < y_.cols(); ++t) time_labels_.push_back(std::to_string(t + 1));
  }
  if (node_ids_.size() != y_.rows()) throw std::invalid_argument("node id count mismatch");
  if (time_labels_.size() != y_.cols()) throw std::invalid_argument("time label count mismatch");
  const std::set<std::string> unique(node_ids_.begin(), node_ids_.end());
  if (unique.size() != node_ids_.size()) throw std::invalid_argument("duplicate node id");
}

CountSeries CountSeries::head(std::size_t steps) const {
  if (steps == 0 || steps > this->steps()) throw std::out_of_range("head: bad step count");
  Matrix<std::int64_t> y(nodes(), steps);
  for (std::size_t i = 0; i < nodes(); ++i) {
    for (std::size_t t = 0; t < steps; ++t) y(i, t) = y_(i, t);
  }
  return CountSeries(std::move(y), node_ids_,
                     {time_labels_.begin(), time_labels_.begin() + static_cast<long>(steps)});
}

double default_population_scale(const Network& net) {
  const auto& pop = net.population();
  if (!pop) throw std::invalid_argument("network has no population covariate");
  return std::accumulate(pop->begin(), pop->end(), 0.0) / static_cast<double>(pop->size());
}

std::vector<double> network_lag(const Network& net, std::span<const double> counts_at_t,
                                PredictorMode mode) {
  const std::size_t n = net.size();
  if (counts_at_t.size() != n) throw std::invalid_argument("network_lag: size mismatch");
  const std::vector<double>* pop = nullptr;
  if (mode == PredictorMode::population_adjusted) {
    if (!net.population()) throw std::invalid_argument("population-adjusted mode needs population");
    pop = &*net.population();
  }
  std::vector<double> lag(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = net.neighbors(i);
    if (nb.empty()) continue;
    double s = 0.0;
    for (std::size_t j : nb) s += pop ? counts_at_t[j] / (*pop)[j] : counts_at_t[j];
    const double deg = static_cast<double>(nb.size());
    lag[i] = pop ? (*pop)[i] / deg * s : s / deg;
  }
  return lag;
}

Predictors build_predictors(const CountSeries& counts, const Network& net, PredictorMode mode,
                            std::optional<double> scale) {
  const std::size_t n = counts.nodes();
  const std::size_t steps = counts.steps();
  if (net.size() != n) throw std::invalid_argument("counts and network disagree on node count");
  Predictors p;
  p.mode = mode;
  if (mode == PredictorMode::population_adjusted) {
    if (!net.population()) throw std::invalid_argument("population-adjusted mode needs population");
    p.scale = scale ? *scale : default_population_scale(net);
    if (!(p.scale > 0.0) || !std::isfinite(p.scale)) {
      throw std::invalid_argument("population scale must be positive");
    }
    p.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.v[i] = (*net.population())[i] / p.scale;
  } else {
    if (scale && !(*scale > 0.0)) throw std::invalid_argument("population scale must be positive");
    p.scale = scale.value_or(1.0);
    p.v.assign(n, 1.0);
  }
  p.x = Matrix<double>(n, steps > 0 ? steps - 1 : 0, 0.0);
  std::vector<double> column(n);
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) column[i] = static_cast<double>(counts.values()(i, t));
    const auto lag = network_lag(net, column, mode);
    for (std::size_t i = 0; i < n; ++i) p.x(i, t) = lag[i];
  }
  return p;
}

double log_factorial(std::int64_t y) { return std::lgamma(static_cast<double>(y) + 1.0); }

ModelData::ModelData(const CountSeries& counts, Predictors predictors)
    : y_(counts.nodes(), counts.steps()),
      log_fact_(counts.nodes(), counts.steps()),
      predictors_(std::move(predictors)) {
  if (predictors_.v.size() != nodes() || predictors_.x.rows() != nodes() ||
      predictors_.x.cols() + 1 != steps()) {
    throw std::invalid_argument("predictors do not match the count series shape");
  }
  for (std::size_t i = 0; i < nodes(); ++i) {
    if (!(predictors_.v[i] >= 0.0) || !std::isfinite(predictors_.v[i])) {
      throw std::invalid_argument("intercept predictor must be finite and nonnegative");
    }
    for (double x : predictors_.x.row(i)) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("network-lag predictor must be finite and nonnegative");
      }
    }
    for (std::size_t t = 0; t < steps(); ++t) {
      const std::int64_t v = counts.values()(i, t);
      y_(i, t) = static_cast<double>(v);
      log_fact_(i, t) = pnarm::log_factorial(v);
    }
  }
}

void ModelData::check_range(const TimeRange& range) const {
  if (range.is_empty()) return;
  if (range.first < 2 || range.last > steps()) {
    throw std::out_of_range("likelihood time range must lie within {2..T}");
  }
}

double node_log_likelihood(std::size_t node, const ClusterParams& theta, const ModelData& data,
                           const TimeRange& range) {
  if (range.is_empty()) return 0.0;
  const std::size_t t0 = range.first;  // Y_{i,t} lives in column t-1
  const double* y = data.y().row(node).data();
  return kernels::active().poisson_loglik(theta.data(), data.predictors().v[node],
                                          data.predictors().x.row(node).data() + (t0 - 2),
                                          y + (t0 - 2), y + (t0 - 1),
                                          data.log_factorial().row(node).data() + (t0 - 1),
                                          range.size());
}

ClusterParams node_log_likelihood_gradient(std::size_t node, const ClusterParams& theta,
                                           const ModelData& data, const TimeRange& range) {
  ClusterParams g{0.0, 0.0, 0.0};
  const double v = data.predictors().v[node];
  for (std::size_t t = range.first; t <= range.last; ++t) {
    const double x = data.predictors().x(node, t - 2);
    const double y_lag = data.y()(node, t - 2);
    const double y = data.y()(node, t - 1);
    const double lambda = conditional_mean(theta, v, x, y_lag);
    const double r = y / lambda - 1.0;
    g[0] += r * v;
    g[1] += r * x;
    g[2] += r * y_lag;
  }
  return g;
}

}  // namespace pnarm
