#include "pnarm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pnarm::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::size_t lookup(const std::map<std::string, std::size_t>& index, const std::string& id,
                   std::size_t line_no) {
  const auto it = index.find(id);
  if (it == index.end()) {
    throw DataError("line " + std::to_string(line_no) + ": unknown node id '" + id + "'");
  }
  return it->second;
}

std::map<std::string, std::size_t> index_ids(const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  return index;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

CountSeries parse_counts_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw DataError("counts file is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError("counts header needs a node column and at least one time");
  std::vector<std::string> times(header.begin() + 1, header.end());
  std::vector<std::string> ids;
  std::vector<std::int64_t> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    ids.push_back(f[0]);
    for (std::size_t k = 1; k < f.size(); ++k) {
      std::int64_t v = 0;
      const auto* end = f[k].data() + f[k].size();
      const auto [ptr, ec] = std::from_chars(f[k].data(), end, v);
      if (ec != std::errc{} || ptr != end || v < 0) {
        throw DataError("line " + std::to_string(line_no) + ": '" + f[k] +
                        "' is not a nonnegative integer count");
      }
      cells.push_back(v);
    }
  }
  if (ids.empty()) throw DataError("counts file has no node rows");
  Matrix<std::int64_t> y(ids.size(), times.size());
  std::copy(cells.begin(), cells.end(), y.data());
  try {
    return CountSeries(std::move(y), std::move(ids), std::move(times));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("counts file: ") + e.what());
  }
}

CountSeries read_counts_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_counts_csv(in);
}

void write_counts_csv(std::ostream& out, const CountSeries& counts) {
  out << "node";
  for (const auto& t : counts.time_labels()) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < counts.nodes(); ++i) {
    out << counts.node_ids()[i];
    for (std::int64_t v : counts.values().row(i)) out << ',' << v;
    out << '\n';
  }
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edges_csv(
    std::istream& in, const std::vector<std::string>& node_ids) {
  const auto index = index_ids(node_ids);
  std::string line;
  if (!next_data_line(in, line)) throw DataError("edges file is empty");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw DataError("line " + std::to_string(line_no) + ": expected two node ids");
    std::size_t a = lookup(index, f[0], line_no);
    std::size_t b = lookup(index, f[1], line_no);
    if (a == b) throw DataError("line " + std::to_string(line_no) + ": self loop");
    if (a > b) std::swap(a, b);
    if (seen.emplace(a, b).second) edges.emplace_back(a, b);
  }
  return edges;
}

std::vector<double> parse_population_csv(std::istream& in, const std::vector<std::string>& node_ids) {
  const auto index = index_ids(node_ids);
  std::string line;
  if (!next_data_line(in, line)) throw DataError("covariates file is empty");
  std::vector<double> pop(node_ids.size(), 0.0);
  std::vector<bool> filled(node_ids.size(), false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw DataError("line " + std::to_string(line_no) + ": expected node,population");
    const std::size_t i = lookup(index, f[0], line_no);
    double p = 0.0;
    const auto* end = f[1].data() + f[1].size();
    const auto [ptr, ec] = std::from_chars(f[1].data(), end, p);
    if (ec != std::errc{} || ptr != end || !(p > 0.0)) {
      throw DataError("line " + std::to_string(line_no) + ": population must be a positive number");
    }
    pop[i] = p;
    filled[i] = true;
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) throw DataError("covariates missing for node '" + node_ids[i] + "'");
  }
  return pop;
}

Network load_network(const std::vector<std::string>& node_ids, const std::filesystem::path& edges,
                     const std::optional<std::filesystem::path>& covariates) {
  auto in = open(edges);
  Network net = Network::from_edges(node_ids, parse_edges_csv(in, node_ids));
  if (covariates) {
    auto cin = open(*covariates);
    net.set_population(parse_population_csv(cin, node_ids));
  }
  return net;
}

void write_draws(std::ostream& out, const std::vector<PosteriorSamples>& chains) {
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& d : chains[c].draws) {
      nlohmann::ordered_json rec;
      rec["chain"] = chains[c].chain;
      rec["iteration"] = d.iteration;
      std::vector<int> labels(d.partition.labels());
      for (int& l : labels) ++l;
      rec["labels"] = labels;
      nlohmann::json thetas = nlohmann::json::array();
      for (const auto& th : d.thetas) thetas.push_back({th[0], th[1], th[2]});
      rec["thetas"] = thetas;
      rec["log_post"] = d.log_post;
      out << rec.dump() << '\n';
    }
  }
}

std::vector<PosteriorSamples> parse_draws(std::istream& in) {
  std::map<std::size_t, PosteriorSamples> by_chain;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> nodes;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      PosteriorDraw d;
      d.iteration = rec.at("iteration").get<std::size_t>();
      auto labels = rec.at("labels").get<std::vector<int>>();
      for (int& l : labels) {
        if (l < 1) throw DataError("labels are 1-based");
        --l;
      }
      d.partition = PartitionState::from_labels(labels);
      if (d.partition.labels() != labels) throw DataError("labels are not in canonical order");
      for (const auto& th : rec.at("thetas")) {
        const auto v = th.get<std::vector<double>>();
        if (v.size() != 3) throw DataError("each theta needs three coefficients");
        d.thetas.push_back({v[0], v[1], v[2]});
      }
      if (d.thetas.size() != d.partition.clusters()) {
        throw DataError("theta count does not match cluster count");
      }
      d.log_post = rec.at("log_post").get<double>();
      if (nodes && *nodes != labels.size()) throw MismatchError("draws disagree on node count");
      nodes = labels.size();
      const auto chain = rec.value("chain", std::size_t{0});
      auto& s = by_chain[chain];
      s.chain = chain;
      s.draws.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("draws line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("draws line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (by_chain.empty()) throw DataError("draws file has no records");
  std::vector<PosteriorSamples> out;
  for (auto& [c, s] : by_chain) out.push_back(std::move(s));
  return out;
}

std::vector<PosteriorSamples> read_draws(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_draws(in);
}

}  // namespace pnarm::io
