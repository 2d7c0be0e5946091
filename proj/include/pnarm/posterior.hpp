#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pnarm/matrix.hpp"
#include "pnarm/mcmc.hpp"
#include "pnarm/model.hpp"

namespace pnarm {

// Fraction of draws in which each pair of nodes shares a cluster.
Matrix<double> cocluster_matrix(std::span<const PosteriorDraw> draws);

struct LeastSquaresPartition {
  std::size_t index = 0;  // 0-based position in the draw list
  double loss = 0.0;
  PartitionState partition;
};

// Sum over i != j of (1{same cluster} - c_hat_ij)^2 for one labelling.
double least_squares_loss(const PartitionState& partition, const Matrix<double>& c_hat);

// Draw minimising least_squares_loss; ties go to the earliest draw.
LeastSquaresPartition least_squares_partition(std::span<const PosteriorDraw> draws,
                                              const Matrix<double>& c_hat);

// Predictor values feeding the one-step-ahead rate at a target time.
struct LagInputs {
  std::vector<double> v;
  std::vector<double> x;      // X_{i,t-1}
  std::vector<double> y_lag;  // Y_{i,t-1}
};

// Inputs for forecasting Y_{.,t} with t in {2..T+1}. t = T+1 builds the
// network lag from the last observed column.
LagInputs lag_inputs_at(const CountSeries& counts, const Predictors& predictors,
                        const Network& net, std::size_t t);

// Per-node mixture of Poisson pmfs; row i of `rates` holds the component rates
// for node i, `weights` is shared by all nodes and sums to 1.
class PredictiveDistribution {
 public:
  PredictiveDistribution(Matrix<double> rates, std::vector<double> weights);

  std::size_t nodes() const { return rates_.rows(); }
  std::size_t components() const { return rates_.cols(); }
  const Matrix<double>& rates() const { return rates_; }
  const std::vector<double>& weights() const { return weights_; }

  double pmf(std::size_t node, std::int64_t y) const;
  // P(Y <= y); 0 for y < 0.
  double cdf(std::size_t node, std::int64_t y) const;
  // P(Y > y), computed directly so it keeps full relative accuracy in the
  // upper tail.
  double sf(std::size_t node, std::int64_t y) const;
  // Predictive mean.
  double mean(std::size_t node) const;
  // Smallest y with cdf(y) >= level.
  std::int64_t quantile(std::size_t node, double level) const;
  // Largest rate of a node's components; sets truncation points in tests.
  double max_rate(std::size_t node) const;

 private:
  Matrix<double> rates_;
  std::vector<double> weights_;
};

// Mixes the draws' one-step rates. Without weights every draw counts 1/M.
PredictiveDistribution predictive_distribution(std::span<const PosteriorDraw> draws,
                                               const LagInputs& inputs,
                                               std::span<const double> draw_weights = {});

// Per-draw weights that give chain c total mass chain_weights[c].
std::vector<double> expand_chain_weights(std::span<const PosteriorSamples> chains,
                                         std::span<const double> chain_weights);

std::vector<PosteriorDraw> pool_draws(std::span<const PosteriorSamples> chains);

// Poisson(y; rate) cdf; 1 for rate 0 and y >= 0.
double poisson_cdf(std::int64_t y, double rate);
// Poisson(y; rate) upper tail P(Y > y).
double poisson_sf(std::int64_t y, double rate);

}  // namespace pnarm
