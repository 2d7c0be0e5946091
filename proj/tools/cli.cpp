#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pnarm/forecast_eval.hpp"
#include "pnarm/graph.hpp"
#include "pnarm/io.hpp"
#include "pnarm/kernels.hpp"
#include "pnarm/posterior.hpp"
#include "pnarm/simulate.hpp"

namespace pnarm::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

PredictorMode parse_mode(const std::string& s) {
  if (s == "raw") return PredictorMode::raw;
  if (s == "population_adjusted") return PredictorMode::population_adjusted;
  throw ConfigError("unknown predictor mode '" + s + "'");
}

std::string mode_name(PredictorMode m) {
  return m == PredictorMode::raw ? "raw" : "population_adjusted";
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

struct LoadedData {
  CountSeries counts;      // everything in the counts file
  CountSeries train;       // first train_steps columns
  Network net{1};
  Predictors train_preds;  // built from `train`
  std::size_t train_steps = 0;
};

LoadedData load_data(const RunConfig& cfg) {
  LoadedData d;
  d.counts = io::read_counts_csv(cfg.counts);
  if (!fs::exists(cfg.edges)) throw io::DataError("edges file not found: " + cfg.edges.string());
  if (cfg.covariates && !fs::exists(*cfg.covariates)) {
    throw io::DataError("covariates file not found: " + cfg.covariates->string());
  }
  d.net = io::load_network(d.counts.node_ids(), cfg.edges, cfg.covariates);
  const std::size_t steps = d.counts.steps();
  d.train_steps = cfg.train_steps.value_or(steps > 1 ? steps - 1 : steps);
  if (d.train_steps < 2 || d.train_steps > steps) {
    throw ConfigError("train_steps must lie in [2, T] (T = " + std::to_string(steps) + ")");
  }
  if (cfg.mode == PredictorMode::population_adjusted && !d.net.population()) {
    throw ConfigError("population_adjusted predictors need a covariates file");
  }
  d.train = d.counts.head(d.train_steps);
  d.train_preds = build_predictors(d.train, d.net, cfg.mode, cfg.scale);
  return d;
}

PartitionPrior make_prior(const RunConfig& cfg, const Network& net) {
  if (cfg.prior.type == "fmm") return FmmPrior{cfg.prior.fmm.components, cfg.prior.fmm.gamma0};
  try {
    return DdpPrior{cfg.prior.ddp.alpha, ddp_weights(shortest_path_matrix(net), cfg.prior.ddp.decay),
                    cfg.prior.scheme};
  } catch (const std::domain_error& e) {
    throw io::DataError(std::string("network cannot support the distance prior: ") + e.what());
  }
}

struct LoadedSamples {
  std::vector<PosteriorSamples> chains;
  std::vector<std::string> sources;  // "<file>#<chain>"
};

LoadedSamples load_samples(const std::vector<std::string>& paths, std::size_t nodes) {
  LoadedSamples s;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw io::DataError("samples file not found: " + p);
    for (auto& chain : io::read_draws(p)) {
      if (chain.draws.front().partition.size() != nodes) {
        throw io::MismatchError("samples in " + p + " have " +
                                std::to_string(chain.draws.front().partition.size()) +
                                " nodes, data has " + std::to_string(nodes));
      }
      s.sources.push_back(p + "#" + std::to_string(chain.chain));
      s.chains.push_back(std::move(chain));
    }
  }
  return s;
}

std::vector<double> draw_weights(const LoadedSamples& s, const std::optional<std::string>& weights_path) {
  if (!weights_path) return {};
  const json j = read_json_file(*weights_path);
  std::vector<double> w;
  try {
    w = j.at("weights").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(*weights_path + ": " + e.what());
  }
  if (w.size() != s.chains.size()) {
    throw io::MismatchError("weights file has " + std::to_string(w.size()) + " entries for " +
                            std::to_string(s.chains.size()) + " chains");
  }
  return expand_chain_weights(s.chains, w);
}

fs::path output_dir(const RunConfig& cfg, const std::optional<std::string>& flag) {
  if (flag) return *flag;
  return cfg.output_dir;
}

int cmd_fit(RunConfig cfg, const std::optional<std::string>& out_flag) {
  const LoadedData d = load_data(cfg);
  const ModelData model(d.train, d.train_preds);
  const PartitionPrior prior = make_prior(cfg, d.net);
  const auto chains = run_multichain(model, {2, d.train_steps}, prior,
                                     CoefficientPrior(cfg.coef_shape, cfg.coef_rate), cfg.mcmc);

  const fs::path dir = output_dir(cfg, out_flag);
  std::ostringstream draws;
  io::write_draws(draws, chains);
  write_text(dir / "draws.jsonl", draws.str());

  ordered_json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = "fit";
  manifest["config"] = run_config_to_json(cfg);
  manifest["nodes"] = d.counts.node_ids();
  manifest["train_steps"] = d.train_steps;
  manifest["kernel_isa"] = std::string(kernels::isa_name(kernels::active().isa));
  ordered_json chain_info = ordered_json::array();
  for (const auto& c : chains) {
    ordered_json ci;
    ci["chain"] = c.chain;
    ci["seed"] = c.seed;
    ci["draws"] = c.draws.size();
    ci["acceptance_rate"] = c.acceptance.rate();
    ci["burn_in_acceptance_rate"] =
        c.acceptance.burn_in_proposed == 0
            ? 0.0
            : static_cast<double>(c.acceptance.burn_in_accepted) / c.acceptance.burn_in_proposed;
    ci["final_rw_step"] = c.final_rw_step;
    ci["degenerate_label_updates"] = c.degenerate_label_updates;
    if (c.degenerate_label_updates > 0) {
      std::cerr << "warning: chain " << c.chain << " fell back to the prior for "
                << c.degenerate_label_updates << " label updates (zero likelihood everywhere)\n";
    }
    chain_info.push_back(ci);
  }
  manifest["chains"] = chain_info;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return kExitOk;
}

int cmd_forecast(const RunConfig& cfg, const std::vector<std::string>& samples,
                 const std::optional<std::string>& weights, const std::optional<std::string>& out_flag) {
  const LoadedData d = load_data(cfg);
  const LoadedSamples s = load_samples(samples, d.counts.nodes());
  const auto pooled = pool_draws(s.chains);
  const auto w = draw_weights(s, weights);
  const std::size_t horizon = d.train_steps + 1;
  const auto dist = predictive_distribution(pooled, lag_inputs_at(d.train, d.train_preds, d.net, horizon), w);
  const auto c_hat = cocluster_matrix(pooled);
  const auto ls = least_squares_partition(pooled, c_hat);

  const std::vector<double> levels{0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975};
  ordered_json report;
  report["horizon"] = horizon;
  report["horizon_label"] =
      horizon <= d.counts.steps() ? d.counts.time_labels()[horizon - 1] : std::string("T+1");
  report["draws"] = pooled.size();
  report["coverage"] = cfg.coverage;
  std::ostringstream pmf_csv;
  pmf_csv << "node,y,pmf,cdf\n";
  std::ostringstream point_csv;
  point_csv << "node,point_forecast,cluster\n";
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < dist.nodes(); ++i) {
    ordered_json n;
    const auto& id = d.counts.node_ids()[i];
    n["node"] = id;
    n["mean"] = dist.mean(i);
    ordered_json q;
    for (double l : levels) q[fmt(l)] = dist.quantile(i, l);
    n["quantiles"] = q;
    n["rates"] = std::vector<double>(dist.rates().row(i).begin(), dist.rates().row(i).end());
    ordered_json table = ordered_json::array();
    double cum = 0.0;
    for (std::int64_t y = 0; cum < cfg.coverage; ++y) {
      const double p = dist.pmf(i, y);
      cum += p;
      table.push_back({y, p, cum});
      pmf_csv << id << ',' << y << ',' << fmt(p) << ',' << fmt(cum) << '\n';
      if (y > (std::int64_t{1} << 40)) break;
    }
    n["pmf"] = table;
    nodes.push_back(n);
    point_csv << id << ',' << fmt(dist.mean(i)) << ',' << ls.partition.label(i) + 1 << '\n';
  }
  report["nodes"] = nodes;
  ordered_json lsj;
  lsj["draw_index"] = ls.index;
  lsj["loss"] = ls.loss;
  std::vector<int> labels(ls.partition.labels());
  for (int& l : labels) ++l;
  lsj["labels"] = labels;
  report["least_squares_partition"] = lsj;
  ordered_json cc = ordered_json::array();
  std::ostringstream cc_csv;
  cc_csv << "node";
  for (const auto& id : d.counts.node_ids()) cc_csv << ',' << id;
  cc_csv << '\n';
  for (std::size_t i = 0; i < c_hat.rows(); ++i) {
    cc.push_back(std::vector<double>(c_hat.row(i).begin(), c_hat.row(i).end()));
    cc_csv << d.counts.node_ids()[i];
    for (double v : c_hat.row(i)) cc_csv << ',' << fmt(v);
    cc_csv << '\n';
  }
  report["cocluster"] = cc;

  const fs::path dir = output_dir(cfg, out_flag);
  write_text(dir / "forecast.json", report.dump(2) + "\n");
  write_text(dir / "forecast_pmf.csv", pmf_csv.str());
  write_text(dir / "point_forecasts.csv", point_csv.str());
  write_text(dir / "cocluster.csv", cc_csv.str());
  return kExitOk;
}

int cmd_score(const RunConfig& cfg, const std::vector<std::string>& samples,
              const std::optional<std::string>& weights, const std::optional<std::string>& out_flag) {
  const LoadedData d = load_data(cfg);
  if (d.train_steps >= d.counts.steps()) {
    throw ConfigError("scoring needs a held-out step: train_steps must be < T");
  }
  const LoadedSamples s = load_samples(samples, d.counts.nodes());
  const auto pooled = pool_draws(s.chains);
  const auto w = draw_weights(s, weights);
  const std::size_t n = d.counts.nodes();

  std::vector<std::size_t> train_times;
  std::vector<PredictiveDistribution> train_dists;
  for (std::size_t t = 2; t <= d.train_steps; ++t) {
    train_times.push_back(t);
    train_dists.push_back(predictive_distribution(pooled, lag_inputs_at(d.train, d.train_preds, d.net, t), w));
  }
  const std::size_t test_time = d.train_steps + 1;
  const std::vector<std::size_t> test_times{test_time};
  const std::vector<PredictiveDistribution> test_dists{
      predictive_distribution(pooled, lag_inputs_at(d.train, d.train_preds, d.net, test_time), w)};

  const auto train_report = log_score(train_dists, train_times, d.counts);
  const auto test_report = log_score(test_dists, test_times, d.counts);

  std::vector<double> point(n), truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    point[i] = test_dists[0].mean(i);
    truth[i] = static_cast<double>(d.counts.at(i, test_time));
  }
  const auto m = mase(point, truth, d.train);

  Rng rng(cfg.pit_seed);
  std::ostringstream pit_csv;
  pit_csv << "node,time,set,pit\n";
  std::vector<double> train_pits;
  auto pits_for = [&](const std::vector<PredictiveDistribution>& dists,
                      const std::vector<std::size_t>& times, const char* set, std::vector<double>* keep) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double u = randomized_pit(dists[k], i, d.counts.at(i, times[k]), rng);
        if (keep) keep->push_back(u);
        pit_csv << d.counts.node_ids()[i] << ',' << times[k] << ',' << set << ',' << fmt(u) << '\n';
      }
    }
  };
  pits_for(train_dists, train_times, "train", &train_pits);
  pits_for(test_dists, test_times, "test", nullptr);

  auto summary = [](const ScoreReport& r, std::size_t nodes) {
    ordered_json j;
    j["mean_log_score"] = r.mean_log_score;
    j["cells"] = nodes * r.times.size();
    j["infinite_cells"] = r.infinite_cells;
    j["times"] = r.times;
    return j;
  };
  ordered_json report;
  report["draws"] = pooled.size();
  report["train"] = summary(train_report, n);
  report["test"] = summary(test_report, n);
  report["mase"] = m.mean;
  report["mase_undefined_nodes"] = m.undefined_nodes;
  const auto hist = pit_histogram(train_pits, 10);
  report["train_pit_histogram"] = hist;
  if (train_report.infinite_cells + test_report.infinite_cells > 0) {
    std::cerr << "warning: " << train_report.infinite_cells + test_report.infinite_cells
              << " cells had zero predictive mass and were excluded from the mean score\n";
  }
  if (m.undefined_nodes > 0) {
    std::cerr << "warning: MASE undefined for " << m.undefined_nodes << " constant training series\n";
  }

  std::ostringstream cells_csv;
  cells_csv << "node,time,set,score\n";
  auto cells_for = [&](const ScoreReport& r, const char* set) {
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        cells_csv << d.counts.node_ids()[i] << ',' << r.times[k] << ',' << set << ','
                  << fmt(r.cell_scores(i, k)) << '\n';
      }
    }
  };
  cells_for(train_report, "train");
  cells_for(test_report, "test");

  std::ostringstream mase_csv;
  mase_csv << "node,forecast,truth,scaled_error\n";
  for (std::size_t i = 0; i < n; ++i) {
    mase_csv << d.counts.node_ids()[i] << ',' << fmt(point[i]) << ',' << fmt(truth[i]) << ','
             << (m.scaled_errors[i] ? fmt(*m.scaled_errors[i]) : std::string("NA")) << '\n';
  }
  std::ostringstream hist_csv;
  hist_csv << "bin_lower,bin_upper,count\n";
  for (std::size_t b = 0; b < hist.size(); ++b) {
    hist_csv << fmt(b / 10.0) << ',' << fmt((b + 1) / 10.0) << ',' << hist[b] << '\n';
  }

  const fs::path dir = output_dir(cfg, out_flag);
  write_text(dir / "score.json", report.dump(2) + "\n");
  write_text(dir / "score_cells.csv", cells_csv.str());
  write_text(dir / "mase.csv", mase_csv.str());
  write_text(dir / "pit.csv", pit_csv.str());
  write_text(dir / "pit_histogram.csv", hist_csv.str());
  return kExitOk;
}

int cmd_stack(const RunConfig& cfg, const std::vector<std::string>& samples,
              const std::optional<std::string>& out_flag) {
  const LoadedData d = load_data(cfg);
  const LoadedSamples s = load_samples(samples, d.counts.nodes());
  const std::size_t n = d.counts.nodes();
  const std::size_t last = d.train_steps;
  const std::size_t first =
      cfg.stacking_window >= last - 1 ? 2 : last - cfg.stacking_window + 1;
  std::vector<LagInputs> inputs;
  for (std::size_t t = first; t <= last; ++t) inputs.push_back(lag_inputs_at(d.train, d.train_preds, d.net, t));

  Matrix<double> density((last - first + 1) * n, s.chains.size());
  for (std::size_t c = 0; c < s.chains.size(); ++c) {
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const auto dist = predictive_distribution(s.chains[c].draws, inputs[k]);
      for (std::size_t i = 0; i < n; ++i) density(k * n + i, c) = dist.pmf(i, d.counts.at(i, first + k));
    }
  }
  StackingResult result;
  try {
    result = stacking_weights(density);
  } catch (const std::domain_error& e) {
    throw io::DataError(e.what());
  }

  ordered_json report;
  report["weights"] = result.weights;
  report["objective"] = result.objective;
  report["iterations"] = result.iterations;
  report["validation_times"] = {first, last};
  report["chains"] = s.sources;
  write_text(output_dir(cfg, out_flag) / "weights.json", report.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const fs::path& config_path, const std::optional<std::string>& out_flag,
                 const std::optional<std::uint64_t>& seed_flag) {
  const json j = read_json_file(config_path);
  const fs::path base = config_path.parent_path();
  SimSpec spec;
  fs::path output;
  try {
    std::vector<std::string> ids;
    if (j.contains("nodes")) {
      ids = j.at("nodes").get<std::vector<std::string>>();
    } else {
      const auto n = j.at("num_nodes").get<std::size_t>();
      for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i + 1));
    }
    std::optional<fs::path> cov;
    if (j.contains("covariates")) cov = resolve(base, j.at("covariates").get<std::string>());
    if (j.contains("edges")) {
      const fs::path edges = resolve(base, j.at("edges").get<std::string>());
      if (!fs::exists(edges)) throw io::DataError("edges file not found: " + edges.string());
      spec.network = io::load_network(ids, edges, cov);
    } else {
      spec.network = Network(ids);
      if (cov) throw ConfigError("covariates need an edges file");
    }
    auto labels = j.at("labels").get<std::vector<int>>();
    for (int& l : labels) {
      if (l < 1) throw ConfigError("labels are 1-based");
      --l;
    }
    spec.partition = PartitionState::from_labels(labels);
    if (spec.partition.labels() != labels) {
      throw ConfigError("labels must be canonical (clusters numbered by first appearance)");
    }
    for (const auto& th : j.at("thetas")) {
      const auto v = th.get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("each theta needs three coefficients");
      spec.thetas.push_back({v[0], v[1], v[2]});
    }
    spec.steps = j.at("steps").get<std::size_t>();
    if (j.contains("y_init")) spec.y_init = j.at("y_init").get<std::vector<std::int64_t>>();
    if (j.contains("predictors")) spec.mode = parse_mode(j.at("predictors").get<std::string>());
    read_opt(j, "scale", spec.scale);
    read_opt(j, "seed", spec.seed);
    output = resolve(base, j.value("output", std::string("counts.csv")));
  } catch (const json::exception& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }
  if (seed_flag) spec.seed = *seed_flag;
  if (out_flag) output = *out_flag;
  SimDiagnostics diag;
  CountSeries counts;
  try {
    counts = simulate(spec, &diag);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (diag.explosive) {
    std::cerr << "warning: simulated rates reached " << diag.max_rate << " (explosive path)\n";
  }
  std::ostringstream csv;
  io::write_counts_csv(csv, counts);
  write_text(output, csv.str());
  return kExitOk;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    if (const char* env = std::getenv("PNARM_OUTPUT_DIR")) c.output_dir = env;
    const json& data = j.at("data");
    c.counts = resolve(base_dir, data.at("counts").get<std::string>());
    c.edges = resolve(base_dir, data.at("edges").get<std::string>());
    if (data.contains("covariates") && !data.at("covariates").is_null()) {
      c.covariates = resolve(base_dir, data.at("covariates").get<std::string>());
    }
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("model")) {
      const json& m = j.at("model");
      if (m.contains("predictors")) c.mode = parse_mode(m.at("predictors").get<std::string>());
      read_opt(m, "scale", c.scale);
    }
    if (j.contains("prior")) {
      const json& p = j.at("prior");
      read_opt(p, "type", c.prior.type);
      if (c.prior.type != "ddp" && c.prior.type != "fmm") {
        throw ConfigError("prior.type must be 'ddp' or 'fmm'");
      }
      read_opt(p, "alpha", c.prior.ddp.alpha);
      read_opt(p, "h", c.prior.ddp.decay);
      read_opt(p, "components", c.prior.fmm.components);
      read_opt(p, "gamma0", c.prior.fmm.gamma0);
      std::string scheme = "sequential";
      read_opt(p, "scheme", scheme);
      if (scheme == "sequential") {
        c.prior.scheme = DdpScheme::sequential;
      } else if (scheme == "pairwise") {
        c.prior.scheme = DdpScheme::pairwise;
      } else {
        throw ConfigError("prior.scheme must be 'sequential' or 'pairwise'");
      }
    }
    if (j.contains("coefficient_prior")) {
      read_opt(j.at("coefficient_prior"), "shape", c.coef_shape);
      read_opt(j.at("coefficient_prior"), "rate", c.coef_rate);
    }
    if (j.contains("mcmc")) {
      const json& m = j.at("mcmc");
      read_opt(m, "iterations", c.mcmc.iterations);
      read_opt(m, "burn_in", c.mcmc.burn_in);
      read_opt(m, "thinning", c.mcmc.thinning);
      read_opt(m, "aux_components", c.mcmc.aux_components);
      read_opt(m, "rw_step", c.mcmc.rw_step);
      read_opt(m, "adapt", c.mcmc.adapt);
      read_opt(m, "seed", c.mcmc.seed);
      read_opt(m, "chains", c.mcmc.chains);
      read_opt(m, "threads", c.mcmc.threads);
      read_opt(m, "random_scan", c.mcmc.random_scan);
    }
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      if (e.contains("train_steps") && !e.at("train_steps").is_null()) {
        c.train_steps = e.at("train_steps").get<std::size_t>();
      }
      read_opt(e, "stacking_window", c.stacking_window);
      read_opt(e, "pit_seed", c.pit_seed);
      read_opt(e, "coverage", c.coverage);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(c.prior.ddp.alpha > 0.0)) throw ConfigError("prior.alpha must be positive");
  if (!(c.prior.ddp.decay >= 0.0)) throw ConfigError("prior.h must be nonnegative");
  if (c.prior.fmm.components == 0) throw ConfigError("prior.components must be positive");
  if (!(c.prior.fmm.gamma0 > 0.0)) throw ConfigError("prior.gamma0 must be positive");
  if (!(c.coef_shape > 0.0) || !(c.coef_rate > 0.0)) {
    throw ConfigError("coefficient_prior shape and rate must be positive");
  }
  if (c.scale && !(*c.scale > 0.0)) throw ConfigError("model.scale must be positive");
  if (c.stacking_window == 0) throw ConfigError("eval.stacking_window must be positive");
  if (!(c.coverage > 0.0 && c.coverage < 1.0)) throw ConfigError("eval.coverage must lie in (0, 1)");
  try {
    c.mcmc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mcmc: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_json_file(path), path.parent_path());
}

ordered_json run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["data"]["counts"] = c.counts.string();
  j["data"]["edges"] = c.edges.string();
  j["data"]["covariates"] = c.covariates ? ordered_json(c.covariates->string()) : ordered_json(nullptr);
  j["output_dir"] = c.output_dir.string();
  j["model"]["predictors"] = mode_name(c.mode);
  j["model"]["scale"] = c.scale ? ordered_json(*c.scale) : ordered_json(nullptr);
  j["prior"]["type"] = c.prior.type;
  if (c.prior.type == "ddp") {
    j["prior"]["alpha"] = c.prior.ddp.alpha;
    j["prior"]["h"] = c.prior.ddp.decay;
    j["prior"]["scheme"] = c.prior.scheme == DdpScheme::sequential ? "sequential" : "pairwise";
  } else {
    j["prior"]["components"] = c.prior.fmm.components;
    j["prior"]["gamma0"] = c.prior.fmm.gamma0;
  }
  j["coefficient_prior"]["shape"] = c.coef_shape;
  j["coefficient_prior"]["rate"] = c.coef_rate;
  auto& m = j["mcmc"];
  m["iterations"] = c.mcmc.iterations;
  m["burn_in"] = c.mcmc.burn_in;
  m["thinning"] = c.mcmc.thinning;
  m["aux_components"] = c.mcmc.aux_components;
  m["rw_step"] = c.mcmc.rw_step;
  m["adapt"] = c.mcmc.adapt;
  m["seed"] = c.mcmc.seed;
  m["chains"] = c.mcmc.chains;
  m["random_scan"] = c.mcmc.random_scan;
  j["eval"]["train_steps"] = c.train_steps ? ordered_json(*c.train_steps) : ordered_json(nullptr);
  j["eval"]["stacking_window"] = c.stacking_window;
  j["eval"]["pit_seed"] = c.pit_seed;
  j["eval"]["coverage"] = c.coverage;
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Bayesian Poisson network autoregression mixtures"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  std::vector<std::string> samples;
  std::optional<std::string> weights;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations, burn_in, thinning, chains, threads, train_steps;
  std::optional<std::uint64_t> pit_seed;

  auto* fit = app.add_subcommand("fit", "run the MCMC sampler and write draws + manifest");
  auto* forecast = app.add_subcommand("forecast", "one-step-ahead predictive distribution");
  auto* score = app.add_subcommand("score", "log scores, MASE and randomized PITs");
  auto* stack = app.add_subcommand("stack", "chain stacking weights on a validation window");
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate counts from the generative model");

  for (auto* sub : {fit, forecast, score, stack, simulate_cmd}) {
    sub->add_option("-c,--config", config, "JSON config file")->required();
    sub->add_option("-o,--out", out, "output directory (output file for simulate)");
  }
  for (auto* sub : {fit, forecast, score, stack}) {
    sub->add_option("--train-steps", train_steps, "number of leading time steps used for fitting");
  }
  for (auto* sub : {forecast, score, stack}) {
    sub->add_option("-s,--samples", samples, "draws file(s)")->required();
  }
  for (auto* sub : {forecast, score}) {
    sub->add_option("-w,--weights", weights, "stacking weights JSON");
  }
  fit->add_option("--seed", seed, "master seed");
  simulate_cmd->add_option("--seed", seed, "simulation seed");
  fit->add_option("--iterations", iterations);
  fit->add_option("--burn-in", burn_in);
  fit->add_option("--thinning", thinning);
  fit->add_option("--chains", chains);
  fit->add_option("--threads", threads);
  score->add_option("--pit-seed", pit_seed, "seed for randomized PITs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(config, out, seed);

    RunConfig cfg = load_run_config(config);
    if (seed) cfg.mcmc.seed = *seed;
    if (iterations) cfg.mcmc.iterations = *iterations;
    if (burn_in) cfg.mcmc.burn_in = *burn_in;
    if (thinning) cfg.mcmc.thinning = *thinning;
    if (chains) cfg.mcmc.chains = *chains;
    if (threads) cfg.mcmc.threads = *threads;
    if (train_steps) cfg.train_steps = *train_steps;
    if (pit_seed) cfg.pit_seed = *pit_seed;
    try {
      cfg.mcmc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("mcmc: ") + e.what());
    }

    if (fit->parsed()) return cmd_fit(cfg, out);
    if (forecast->parsed()) return cmd_forecast(cfg, samples, weights, out);
    if (score->parsed()) return cmd_score(cfg, samples, weights, out);
    if (stack->parsed()) return cmd_stack(cfg, samples, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const io::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const io::MismatchError& e) {
    std::cerr << "mismatch: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("pnarm");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace pnarm::cli
