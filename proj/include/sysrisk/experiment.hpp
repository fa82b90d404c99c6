#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sysrisk/generators.hpp"
#include "sysrisk/metrics.hpp"
#include "sysrisk/network_io.hpp"
#include "sysrisk/optimizer.hpp"

namespace sysrisk {

struct NetworkSource {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  LoadOptions options;
};

struct ChainSpec {
  std::string label;
  AnnealConfig anneal;
  // Chain seeds not given explicitly are derived from the experiment seed.
  bool explicit_seed = false;
};

struct ExperimentConfig {
  std::string label = "experiment";
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 1;
  std::optional<PopulationSpec> population;
  bool explicit_population_seed = false;
  std::optional<NetworkSource> network;
  int assortativity_bins = kDefaultAssortativityBins;
  NodeProperty source_property = NodeProperty::kLiabilityRatio;
  NodeProperty target_property = NodeProperty::kLeverage;
  std::vector<ChainSpec> chains;
  // Network sizes for a scaling batch; empty for a single experiment.
  std::vector<std::size_t> scaling_sizes;
  // The document the config was parsed from, echoed into every result.
  nlohmann::json source;
};

// Strict parse: unknown keys, wrong types and missing required entries throw
// kParseError. Relative file paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trial_terms;
  std::optional<int> final_terms;
  std::optional<std::filesystem::path> output_dir;
};

// Applies command-line overrides and re-derives chain/population seeds.
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

struct ChainOutcome {
  std::string label;
  std::size_t n_banks = 0;
  Direction direction = Direction::kMinimize;
  PsiReport report;
  double assortativity = 0.0;
  double mean_degree = 0.0;
  std::filesystem::path trace_file, result_file, network_file, nodes_file;
};

// Anneals every chain (independent chains run concurrently) and writes, per
// chain: trace_<label>.csv, result_<label>.json, network_<label>.csv,
// nodes_<label>.csv and timing_<label>.json. Everything except the timing
// file is a deterministic function of the configuration.
std::vector<ChainOutcome> run_experiment(const ExperimentConfig& cfg);

// Runs every chain for every population size in cfg.scaling_sizes (labels
// <chain>_N<size>) and writes scaling_<label>.csv with one row per run.
std::vector<ChainOutcome> run_scaling(const ExperimentConfig& cfg);

inline constexpr const char* kTraceHeader = "n,psi,lambda,assortativity,mean_degree,acceptance_rate";

}  // namespace sysrisk
