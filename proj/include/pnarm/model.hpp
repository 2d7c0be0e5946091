#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnarm/graph.hpp"
#include "pnarm/matrix.hpp"

namespace pnarm {

// Per-node counts, nodes in rows and time steps 1..T in columns.
class CountSeries {
 public:
  CountSeries() = default;
  explicit CountSeries(Matrix<std::int64_t> y, std::vector<std::string> node_ids = {},
                       std::vector<std::string> time_labels = {});

  std::size_t nodes() const { return y_.rows(); }
  std::size_t steps() const { return y_.cols(); }

  // 1-based time, as in the model equations.
  std::int64_t at(std::size_t node, std::size_t t) const { return y_(node, t - 1); }
  const Matrix<std::int64_t>& values() const { return y_; }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  const std::vector<std::string>& time_labels() const { return time_labels_; }

  // First `steps` time points.
  CountSeries head(std::size_t steps) const;

 private:
  Matrix<std::int64_t> y_;
  std::vector<std::string> node_ids_;
  std::vector<std::string> time_labels_;
};

enum class PredictorMode { raw, population_adjusted };

// Coefficients (intercept, network lag, own lag) of one cluster.
using ClusterParams = std::array<double, 3>;

// v_i and the network lag X_{i,t-1}; x(i, t-2) holds X_{i,t-1} for t = 2..T.
struct Predictors {
  std::vector<double> v;
  Matrix<double> x;
  PredictorMode mode = PredictorMode::raw;
  double scale = 1.0;
};

// Mean population, the default scaling constant for v_i = p_i / c.
double default_population_scale(const Network& net);

// Network lag X_{.,t} computed from counts at time t. Isolated nodes get 0.
std::vector<double> network_lag(const Network& net, std::span<const double> counts_at_t,
                                PredictorMode mode);

Predictors build_predictors(const CountSeries& counts, const Network& net, PredictorMode mode,
                            std::optional<double> scale = std::nullopt);

inline double conditional_mean(const ClusterParams& theta, double v, double x, double y_lag) {
  return theta[0] * v + theta[1] * x + theta[2] * y_lag;
}

// Inclusive range of 1-based time indices used as likelihood terms.
struct TimeRange {
  std::size_t first = 2;
  std::size_t last = 1;

  static TimeRange empty() { return {2, 1}; }
  bool is_empty() const { return first > last; }
  std::size_t size() const { return is_empty() ? 0 : last - first + 1; }
};

// Counts and predictors laid out for the likelihood kernels: doubles,
// precomputed log(y!).
class ModelData {
 public:
  ModelData(const CountSeries& counts, Predictors predictors);

  std::size_t nodes() const { return y_.rows(); }
  std::size_t steps() const { return y_.cols(); }
  const Predictors& predictors() const { return predictors_; }
  // y(i, t-1) is Y_{i,t}.
  const Matrix<double>& y() const { return y_; }
  const Matrix<double>& log_factorial() const { return log_fact_; }

  // Full range {2..T}.
  TimeRange full_range() const { return {2, steps()}; }
  void check_range(const TimeRange& range) const;

 private:
  Matrix<double> y_;
  Matrix<double> log_fact_;
  Predictors predictors_;
};

double log_factorial(std::int64_t y);

// Sum over t in range of log Poisson(Y_{i,t}; lambda_{i,t}). -inf when a
// positive count meets a zero rate.
double node_log_likelihood(std::size_t node, const ClusterParams& theta, const ModelData& data,
                           const TimeRange& range);

// Analytic gradient with respect to theta; requires every lambda > 0.
ClusterParams node_log_likelihood_gradient(std::size_t node, const ClusterParams& theta,
                                           const ModelData& data, const TimeRange& range);

}  // namespace pnarm
