#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "pnarm/matrix.hpp"
#include "pnarm/model.hpp"
#include "pnarm/rng.hpp"

namespace pnarm {

// Cluster labels in canonical form: 0-based, contiguous, numbered in order of
// first appearance. Serialized 1-based.
class PartitionState {
 public:
  PartitionState() = default;
  // Canonicalizes any labelling.
  static PartitionState from_labels(std::span<const int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t clusters() const { return occupancy_.size(); }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::size_t>& occupancy() const { return occupancy_; }

  friend bool operator==(const PartitionState&, const PartitionState&) = default;

 private:
  std::vector<int> labels_;
  std::vector<std::size_t> occupancy_;
};

// Relabels to first-appearance order; `mapping[old] = new` (or -1 when unused)
// is written if requested.
std::vector<int> canonical_labels(std::span<const int> labels, std::vector<int>* mapping = nullptr);

struct DdpHyper {
  double alpha = 1.0;  // new-cluster mass
  double decay = 1.0;  // h in exp(-h d_ij)
};

struct FmmHyper {
  std::size_t components = 5;
  double gamma0 = 1.0;  // symmetric Dirichlet concentration
};

enum class DdpScheme {
  // Gibbs on the full conditionals of the node-order sequential allocation
  // joint. Coincides with `pairwise` when all weights are 1.
  sequential,
  // The pairwise co-clustering conditionals used verbatim as Gibbs updates.
  pairwise,
};

struct DdpPrior {
  double alpha = 1.0;
  Matrix<double> weights;  // from ddp_weights
  DdpScheme scheme = DdpScheme::sequential;
};

struct FmmPrior {
  std::size_t components = 5;
  double gamma0 = 1.0;
};

using PartitionPrior = std::variant<DdpPrior, FmmPrior>;

// Probabilities of node i joining each of the k clusters of the other nodes,
// then of opening a new one: entry c is proportional to the summed weights
// w_ij of the nodes j != i in cluster c, the last entry to alpha. `labels[j]`
// for j != i must lie in [0, k); labels[i] is ignored.
std::vector<double> ddp_conditional(std::size_t i, std::span<const int> labels, std::size_t k,
                                    const Matrix<double>& weights, double alpha);

// Allocation probabilities for node n given nodes 0..n-1 only (labels of
// those in [0, k)). Weights are not renormalized to the prefix, so with
// unit weights this is the Chinese-restaurant rule.
std::vector<double> sequential_conditional(std::size_t n, std::span<const int> labels,
                                           std::size_t k, const Matrix<double>& weights,
                                           double alpha);

// log of the node-order sequential allocation probability of a labelling.
double ddp_sequential_log_prior(std::span<const int> labels, const Matrix<double>& weights,
                                double alpha);

// Collapsed Dirichlet-multinomial conditional: entry k proportional to
// n_k^{(-i)} + gamma0.
std::vector<double> fmm_conditional(std::size_t i, std::span<const int> labels,
                                    std::size_t components, double gamma0);

// log p(z) under the collapsed Dirichlet-multinomial with K components.
double fmm_log_prior(std::span<const int> labels, std::size_t components, double gamma0);

// Independent Gamma(shape, rate) on each coefficient.
class CoefficientPrior {
 public:
  CoefficientPrior(double shape = 1.0, double rate = 1.0);

  double shape() const { return shape_; }
  double rate() const { return rate_; }

  // -inf off the open positive orthant.
  double log_pdf(const ClusterParams& theta) const;
  ClusterParams sample(Rng& rng) const;

 private:
  double shape_;
  double rate_;
  double log_norm_;  // a log b - lgamma(a)
};

}  // namespace pnarm
