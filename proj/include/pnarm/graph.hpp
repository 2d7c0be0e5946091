#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pnarm/matrix.hpp"

namespace pnarm {

// Undirected simple graph over labelled nodes, with optional node population.
class Network {
 public:
  // Nodes named "1".."n" with no edges.
  explicit Network(std::size_t n);
  explicit Network(std::vector<std::string> node_ids);

  // Edges given as node index pairs; self loops are rejected and duplicates
  // collapse.
  static Network from_edges(std::vector<std::string> node_ids,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t size() const { return node_ids_.size(); }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  std::optional<std::size_t> index_of(const std::string& id) const;

  void add_edge(std::size_t i, std::size_t j);
  bool adjacent(std::size_t i, std::size_t j) const { return adjacency_(i, j) != 0; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  std::size_t degree(std::size_t i) const { return neighbors_[i].size(); }

  void set_population(std::vector<double> population);
  const std::optional<std::vector<double>>& population() const { return population_; }

 private:
  std::vector<std::string> node_ids_;
  Matrix<unsigned char> adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;  // sorted ascending
  std::optional<std::vector<double>> population_;
};

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Hop counts; pairs in different components hold kUnreachable.
using DistanceMatrix = Matrix<double>;

DistanceMatrix shortest_path_matrix(const Network& net);

// Distance-decay co-clustering weights exp(-decay * d_ij), each row rescaled so
// its off-diagonal entries sum to N - 1. Diagonal is 0. Throws
// std::domain_error when a row has no positive weight to rescale.
Matrix<double> ddp_weights(const DistanceMatrix& d, double decay);

}  // namespace pnarm
