#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pnarm/model.hpp"
#include "pnarm/partition_prior.hpp"
#include "pnarm/rng.hpp"

namespace pnarm {

struct McmcConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 10000;
  std::size_t thinning = 10;
  std::size_t aux_components = 3;  // fresh prior draws offered as new clusters
  double rw_step = 0.1;            // std of the log-scale random walk
  bool adapt = true;               // tune rw_step toward 0.25 acceptance during burn-in
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  std::size_t threads = 0;         // 0: one per chain up to hardware concurrency
  bool random_scan = false;        // random node order in the label sweep
  bool update_coefficients = true; // false freezes the initial coefficients

  void validate() const;
  std::size_t retained_draws() const { return (iterations - burn_in) / thinning; }
};

// Uniform prior over a finite set of coefficient vectors. Coefficients are
// then updated by exact Gibbs over the set instead of a random walk.
struct DiscreteCoefficientPrior {
  std::vector<ClusterParams> support;
};

using ThetaPrior = std::variant<CoefficientPrior, DiscreteCoefficientPrior>;

struct ChainState {
  // DDP: canonical-contiguous labels, one theta per cluster.
  // FMM: component index per node, one theta per component (some may be empty).
  std::vector<int> labels;
  std::vector<ClusterParams> thetas;
  std::vector<double> node_loglik;  // cached per-node log-likelihood
  double log_post = 0.0;            // joint log density up to a constant
};

struct AcceptanceStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  std::size_t burn_in_proposed = 0;
  std::size_t burn_in_accepted = 0;

  double rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

struct PosteriorDraw {
  std::size_t iteration = 0;
  PartitionState partition;
  std::vector<ClusterParams> thetas;  // indexed by canonical label
  double log_post = 0.0;

  const ClusterParams& theta_of(std::size_t node) const {
    return thetas[static_cast<std::size_t>(partition.label(node))];
  }
};

struct PosteriorSamples {
  std::vector<PosteriorDraw> draws;
  AcceptanceStats acceptance;
  double final_rw_step = 0.0;
  std::size_t degenerate_label_updates = 0;  // likelihood -inf everywhere; prior used
  std::uint64_t seed = 0;
  std::size_t chain = 0;

  std::size_t size() const { return draws.size(); }
};

// Gibbs sweeps over labels alternating with coefficient updates, for a fixed
// data set, likelihood window and pair of priors.
class Sampler {
 public:
  Sampler(const ModelData& data, TimeRange range, PartitionPrior partition_prior,
          ThetaPrior theta_prior, McmcConfig config);

  const McmcConfig& config() const { return config_; }
  const PartitionPrior& partition_prior() const { return partition_prior_; }

  // Swaps the observed data (same shape) and refreshes a state's caches.
  void set_data(const ModelData& data);
  void refresh(ChainState& state) const;

  // Labels by sequential allocation from the partition prior, coefficients
  // from the coefficient prior.
  ChainState initial_state(Rng& rng) const;

  // One sweep over all nodes. Returns the number of nodes whose likelihood was
  // -inf under every candidate (prior-only fallback).
  std::size_t update_labels(ChainState& state, Rng& rng) const;

  // One update per cluster; accumulates proposals/acceptances.
  void update_coefficients(ChainState& state, Rng& rng, double rw_step, std::size_t& proposed,
                           std::size_t& accepted) const;

  // Joint log density recomputed from scratch.
  double log_posterior(const ChainState& state) const;
  // Joint log density from the cached node log-likelihoods.
  double cached_log_posterior(const ChainState& state) const;

  PosteriorDraw snapshot(const ChainState& state, std::size_t iteration) const;

  PosteriorSamples run(std::uint64_t seed, std::optional<ChainState> init = std::nullopt) const;

 private:
  double node_ll(std::size_t node, const ClusterParams& theta) const;
  double partition_log_prior(const std::vector<int>& labels) const;
  double theta_log_prior(const ClusterParams& theta) const;
  ClusterParams draw_theta(Rng& rng) const;

  std::size_t update_labels_ddp(ChainState& state, Rng& rng, const DdpPrior& prior) const;
  std::size_t update_labels_fmm(ChainState& state, Rng& rng, const FmmPrior& prior) const;
  std::vector<std::size_t> sweep_order(Rng& rng) const;

  const ModelData* data_;
  TimeRange range_;
  PartitionPrior partition_prior_;
  ThetaPrior theta_prior_;
  McmcConfig config_;
  std::vector<double> fmm_lgamma_;  // lgamma(c + gamma0) for c = 0..N
};

PosteriorSamples run_chain(const ModelData& data, TimeRange range, const PartitionPrior& prior,
                           const ThetaPrior& theta_prior, const McmcConfig& config);

// Chains use seeds mix_seed(config.seed, c) and may run on worker threads;
// output depends only on the configuration.
std::vector<PosteriorSamples> run_multichain(const ModelData& data, TimeRange range,
                                             const PartitionPrior& prior,
                                             const ThetaPrior& theta_prior,
                                             const McmcConfig& config);

// Sequential allocation in ascending node order from either partition prior.
// DDP labels are canonical; FMM labels are raw component indices.
std::vector<int> sample_prior_labels(const PartitionPrior& prior, std::size_t nodes, Rng& rng);

}  // namespace pnarm
