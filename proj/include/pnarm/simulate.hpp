#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pnarm/graph.hpp"
#include "pnarm/model.hpp"
#include "pnarm/partition_prior.hpp"
#include "pnarm/rng.hpp"

namespace pnarm {

struct SimSpec {
  Network network{1};
  PartitionState partition;
  std::vector<ClusterParams> thetas;  // one per cluster
  std::size_t steps = 2;
  std::optional<std::vector<std::int64_t>> y_init;  // default: Poisson(theta_1 v_i)
  PredictorMode mode = PredictorMode::raw;
  std::optional<double> scale;
  std::uint64_t seed = 1;
};

struct SimDiagnostics {
  double max_rate = 0.0;
  bool explosive = false;  // some rate exceeded 1e6
};

inline constexpr double kExplosiveRate = 1e6;

CountSeries simulate(const SimSpec& spec, SimDiagnostics* diagnostics = nullptr);

// Same, drawing from a caller-owned stream (replicate loops).
CountSeries simulate(const SimSpec& spec, Rng& rng, SimDiagnostics* diagnostics = nullptr);

// Sequential allocation from the prior, returned in canonical form.
PartitionState simulate_prior_partition(const PartitionPrior& prior, std::size_t nodes, Rng& rng);

}  // namespace pnarm
