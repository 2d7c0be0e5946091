#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnarm/graph.hpp"
#include "pnarm/mcmc.hpp"
#include "pnarm/model.hpp"

namespace pnarm::io {

// Malformed or missing input data (CLI exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Artifacts that do not belong together, e.g. draws for a different node
// count (CLI exit code 4).
struct MismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Counts CSV: header "node,<time label>,...", then one row per node with
// nonnegative integer cells. Fields are comma separated without quoting.
CountSeries read_counts_csv(const std::filesystem::path& path);
CountSeries parse_counts_csv(std::istream& in);
void write_counts_csv(std::ostream& out, const CountSeries& counts);

// Edge list CSV: header line, then "<node id>,<node id>" per undirected edge.
// Duplicates (in either orientation) collapse.
std::vector<std::pair<std::size_t, std::size_t>> parse_edges_csv(
    std::istream& in, const std::vector<std::string>& node_ids);

// Covariates CSV: header line, then "<node id>,<population>" for every node.
std::vector<double> parse_population_csv(std::istream& in, const std::vector<std::string>& node_ids);

Network load_network(const std::vector<std::string>& node_ids, const std::filesystem::path& edges,
                     const std::optional<std::filesystem::path>& covariates);

// Draws file: one JSON object per retained iteration,
// {"chain":c,"iteration":k,"labels":[1-based...],"thetas":[[t1,t2,t3],...],"log_post":x}
void write_draws(std::ostream& out, const std::vector<PosteriorSamples>& chains);
std::vector<PosteriorSamples> parse_draws(std::istream& in);
std::vector<PosteriorSamples> read_draws(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace pnarm::io
