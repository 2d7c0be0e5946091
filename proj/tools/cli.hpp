#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pnarm/mcmc.hpp"
#include "pnarm/model.hpp"
#include "pnarm/partition_prior.hpp"

namespace pnarm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitMismatch = 4;

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PriorConfig {
  std::string type = "ddp";  // "ddp" | "fmm"
  DdpHyper ddp;
  DdpScheme scheme = DdpScheme::sequential;
  FmmHyper fmm;
};

struct RunConfig {
  std::filesystem::path counts;
  std::filesystem::path edges;
  std::optional<std::filesystem::path> covariates;
  std::filesystem::path output_dir = ".";
  PredictorMode mode = PredictorMode::raw;
  std::optional<double> scale;
  PriorConfig prior;
  double coef_shape = 1.0;
  double coef_rate = 1.0;
  McmcConfig mcmc;
  std::optional<std::size_t> train_steps;  // default: T - 1
  std::size_t stacking_window = 4;
  std::uint64_t pit_seed = 1;
  double coverage = 0.9999;
};

// Relative paths resolve against `base_dir`. Missing keys keep defaults.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

// Entry point shared by the binary and the tests; returns the exit code.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace pnarm::cli
