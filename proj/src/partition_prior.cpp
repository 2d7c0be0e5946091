#include "pnarm/partition_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pnarm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize(std::vector<double>& p) {
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
}

}  // namespace

std::vector<int> canonical_labels(std::span<const int> labels, std::vector<int>* mapping) {
  std::vector<int> map;
  std::vector<int> out(labels.size());
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0) throw std::invalid_argument("cluster labels must be nonnegative");
    if (static_cast<std::size_t>(l) >= map.size()) map.resize(static_cast<std::size_t>(l) + 1, -1);
    if (map[static_cast<std::size_t>(l)] < 0) map[static_cast<std::size_t>(l)] = next++;
    out[i] = map[static_cast<std::size_t>(l)];
  }
  if (mapping) *mapping = std::move(map);
  return out;
}

PartitionState PartitionState::from_labels(std::span<const int> labels) {
  PartitionState s;
  s.labels_ = canonical_labels(labels);
  for (int l : s.labels_) {
    if (static_cast<std::size_t>(l) >= s.occupancy_.size()) s.occupancy_.push_back(0);
    ++s.occupancy_[static_cast<std::size_t>(l)];
  }
  return s;
}

std::vector<double> ddp_conditional(std::size_t i, std::span<const int> labels, std::size_t k,
                                    const Matrix<double>& weights, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::vector<double> p(k + 1, 0.0);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == i) continue;
    p[static_cast<std::size_t>(labels[j])] += weights(i, j);
  }
  p[k] = alpha;
  normalize(p);
  return p;
}

std::vector<double> sequential_conditional(std::size_t n, std::span<const int> labels,
                                           std::size_t k, const Matrix<double>& weights,
                                           double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::vector<double> p(k + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) p[static_cast<std::size_t>(labels[j])] += weights(n, j);
  p[k] = alpha;
  normalize(p);
  return p;
}

double ddp_sequential_log_prior(std::span<const int> labels, const Matrix<double>& weights,
                                double alpha) {
  double lp = 0.0;
  for (std::size_t n = 1; n < labels.size(); ++n) {
    double same = 0.0;
    double total = alpha;
    bool seen = false;
    for (std::size_t j = 0; j < n; ++j) {
      total += weights(n, j);
      if (labels[j] == labels[n]) {
        same += weights(n, j);
        seen = true;
      }
    }
    const double numer = seen ? same : alpha;
    if (numer <= 0.0) return kNegInf;
    lp += std::log(numer) - std::log(total);
  }
  return lp;
}

std::vector<double> fmm_conditional(std::size_t i, std::span<const int> labels,
                                    std::size_t components, double gamma0) {
  if (components == 0) throw std::invalid_argument("FMM needs at least one component");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("gamma0 must be positive");
  std::vector<double> p(components, gamma0);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == i) continue;
    p[static_cast<std::size_t>(labels[j])] += 1.0;
  }
  normalize(p);
  return p;
}

double fmm_log_prior(std::span<const int> labels, std::size_t components, double gamma0) {
  std::vector<double> counts(components, 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  const double k = static_cast<double>(components);
  double lp = std::lgamma(k * gamma0) - std::lgamma(static_cast<double>(labels.size()) + k * gamma0);
  for (double c : counts) lp += std::lgamma(c + gamma0) - std::lgamma(gamma0);
  return lp;
}

CoefficientPrior::CoefficientPrior(double shape, double rate) : shape_(shape), rate_(rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("coefficient prior shape and rate must be positive");
  }
  log_norm_ = shape * std::log(rate) - std::lgamma(shape);
}

double CoefficientPrior::log_pdf(const ClusterParams& theta) const {
  double lp = 0.0;
  for (double t : theta) {
    if (!(t > 0.0)) return kNegInf;
    lp += log_norm_ + (shape_ - 1.0) * std::log(t) - rate_ * t;
  }
  return lp;
}

ClusterParams CoefficientPrior::sample(Rng& rng) const {
  ClusterParams theta{};
  for (double& t : theta) t = rng.gamma(shape_, rate_);
  return theta;
}

}  // namespace pnarm
