#include "pnarm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace pnarm {

Network::Network(std::size_t n) : Network([n] {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i + 1));
  return ids;
}()) {}

Network::Network(std::vector<std::string> node_ids)
    : node_ids_(std::move(node_ids)),
      adjacency_(node_ids_.size(), node_ids_.size(), 0),
      neighbors_(node_ids_.size()) {
  if (node_ids_.empty()) throw std::invalid_argument("network needs at least one node");
  std::vector<std::string> sorted = node_ids_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate node id");
  }
}

Network Network::from_edges(std::vector<std::string> node_ids,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Network net(std::move(node_ids));
  for (const auto& [i, j] : edges) net.add_edge(i, j);
  return net;
}

std::optional<std::size_t> Network::index_of(const std::string& id) const {
  const auto it = std::find(node_ids_.begin(), node_ids_.end(), id);
  if (it == node_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - node_ids_.begin());
}

void Network::add_edge(std::size_t i, std::size_t j) {
  if (i >= size() || j >= size()) throw std::out_of_range("edge endpoint out of range");
  if (i == j) throw std::invalid_argument("self loops are not allowed");
  if (adjacent(i, j)) return;
  adjacency_(i, j) = adjacency_(j, i) = 1;
  auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
  };
  insert_sorted(neighbors_[i], j);
  insert_sorted(neighbors_[j], i);
}

void Network::set_population(std::vector<double> population) {
  if (population.size() != size()) {
    throw std::invalid_argument("population length must equal node count");
  }
  for (double p : population) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("population entries must be positive and finite");
    }
  }
  population_ = std::move(population);
}

DistanceMatrix shortest_path_matrix(const Network& net) {
  const std::size_t n = net.size();
  DistanceMatrix d(n, n, kUnreachable);
  std::deque<std::size_t> queue;
  for (std::size_t src = 0; src < n; ++src) {
    d(src, src) = 0.0;
    queue.assign(1, src);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t w : net.neighbors(u)) {
        if (d(src, w) == kUnreachable) {
          d(src, w) = d(src, u) + 1.0;
          queue.push_back(w);
        }
      }
    }
  }
  return d;
}

Matrix<double> ddp_weights(const DistanceMatrix& d, double decay) {
  if (d.rows() != d.cols()) throw std::invalid_argument("distance matrix must be square");
  if (!(decay >= 0.0) || !std::isfinite(decay)) {
    throw std::invalid_argument("decay must be finite and nonnegative");
  }
  const std::size_t n = d.rows();
  Matrix<double> w(n, n, 0.0);
  if (n <= 1) return w;
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      // decay == 0 gives weight 1 even across components.
      const double raw = decay == 0.0 ? 1.0
                         : d(i, j) == kUnreachable ? 0.0
                                                   : std::exp(-decay * d(i, j));
      w(i, j) = raw;
      total += raw;
    }
    if (!(total > 0.0)) {
      throw std::domain_error("node " + std::to_string(i + 1) +
                              " has zero co-clustering weight to every other node");
    }
    const double scale = static_cast<double>(n - 1) / total;
    for (std::size_t j = 0; j < n; ++j) w(i, j) *= scale;
  }
  return w;
}

}  // namespace pnarm
