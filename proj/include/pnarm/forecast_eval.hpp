#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pnarm/matrix.hpp"
#include "pnarm/model.hpp"
#include "pnarm/posterior.hpp"
#include "pnarm/rng.hpp"

namespace pnarm {

// Logarithmic scores -log p(y) per (node, scored time).
struct ScoreReport {
  std::vector<std::size_t> times;  // 1-based scored time indices
  Matrix<double> cell_scores;      // nodes x times; +inf where the forecast had no mass
  double mean_log_score = 0.0;     // over finite cells
  std::size_t infinite_cells = 0;
};

// `forecasts[k]` is the predictive for time `times[k]`; `observed` holds the
// full counts.
ScoreReport log_score(std::span<const PredictiveDistribution> forecasts,
                      std::span<const std::size_t> times, const CountSeries& observed);

// Per-cell score computed literally from the cdf difference.
double cdf_difference_score(const PredictiveDistribution& dist, std::size_t node, std::int64_t y);

struct MaseReport {
  std::vector<std::optional<double>> scaled_errors;  // nullopt: zero naive error
  double mean = 0.0;
  std::size_t undefined_nodes = 0;
};

// |truth - forecast| scaled by the in-sample mean absolute one-step naive
// error of each node's training series.
MaseReport mase(std::span<const double> forecasts, std::span<const double> truth,
                const CountSeries& training);

// One draw from Uniform(P(y-1), P(y)).
double randomized_pit(const PredictiveDistribution& dist, std::size_t node, std::int64_t y,
                      Rng& rng);
double randomized_pit(double cdf_below, double cdf_at, Rng& rng);

// Equal-width bins on [0, 1]; 1.0 lands in the last bin.
std::vector<std::size_t> pit_histogram(std::span<const double> u, std::size_t bins);

struct StackingResult {
  std::vector<double> weights;
  double objective = 0.0;  // sum over cells of log sum_c w_c p_c
  std::size_t iterations = 0;
};

// density(cell, chain) > 0 for at least one chain per cell. Maximises the
// validation log score over the simplex with EM fixed-point updates from the
// uniform start.
StackingResult stacking_weights(const Matrix<double>& density, double tolerance = 1e-10,
                                std::size_t max_iterations = 10000);

double stacking_objective(const Matrix<double>& density, std::span<const double> weights);

// Kolmogorov-Smirnov statistic of a sample against Uniform(0, 1), and the
// asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
KsResult ks_uniform(std::vector<double> sample);

}  // namespace pnarm
