#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elkde/engmf.hpp"
#include "elkde/metrics.hpp"
#include "elkde/testbeds.hpp"

namespace elkde {

EvalGrid default_spiral_grid();  // [-8, 8]^2, 256 x 256 midpoint cells

struct SpiralExperimentOptions {
  SpiralDistribution distribution{};
  EvalGrid grid = default_spiral_grid();
  bool emit_density_grid = false;
};

struct L63ExperimentOptions {
  Lorenz63Config dynamics{};
  int steps = 5500;
  int spinup = 500;
  int sir_size = 25000;
  std::vector<double> sir_tau_grid = {0.25, 0.5, 1.0};
  double snees_discard = 100.0;
};

/// Full experiment description. Build one with default_spiral_config() or
/// default_l63_config(), then override via JSON and/or CLI flags.
struct ExperimentConfig {
  std::string experiment;  // "spiral" or "l63"
  std::vector<int> ensemble_sizes;
  std::vector<std::string> methods;
  int mc_runs = 12;
  std::uint64_t master_seed = 42;
  std::string output_dir = ".";
  int threads = 0;  // 0: ELKDE_THREADS env, then hardware concurrency

  BandwidthSpec bandwidth{};
  AkdeOptions akde{};
  ElkdeOptions elkde{};
  SpiralExperimentOptions spiral{};
  L63ExperimentOptions l63{};
};

ExperimentConfig default_spiral_config();
ExperimentConfig default_l63_config();

/// Merge a JSON document into the config; unknown keys are errors.
void apply_config_json(ExperimentConfig& cfg, const std::string& json_text);
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

/// FNV-1a digest of the canonical serialized config (threads and output
/// location excluded).
std::string config_digest(const ExperimentConfig& cfg);

/// Thread-count resolution: explicit request, then the ELKDE_THREADS
/// environment variable, then hardware concurrency.
int resolve_threads(int requested);

struct MethodStat {
  double mean = 0.0;
  double plus3 = 0.0;   // mean + 3 std
  double minus3 = 0.0;  // mean - 3 std
};

/// Aggregated results keyed by ensemble size, one column triple per method.
struct ResultTable {
  std::vector<int> sizes;
  std::vector<std::string> methods;
  std::vector<std::vector<MethodStat>> stats;  // [method][size row]
  std::uint64_t seed = 0;
  std::string digest;
  double wall_time_seconds = 0.0;
  std::vector<std::string> warnings;
  std::optional<double> sir_reference;

  std::string to_csv() const;
};

/// Write the CSV table plus a companion <path>.meta.json metadata file.
void emit_table(const ResultTable& table, const std::string& path);

struct DensityDump {
  int size = 0;
  std::string method;
  std::vector<double> values;  // grid-ordered densities
};

struct SpiralResults {
  ResultTable mise;
  std::vector<double> true_density;  // populated when emit_density_grid is set
  std::vector<DensityDump> dumps;
};

SpiralResults run_spiral_experiment(const ExperimentConfig& cfg);

/// Write the true and estimated density grids from a spiral run.
void emit_density_grids(const SpiralResults& results, const EvalGrid& grid,
                        const std::string& output_dir);

struct L63Results {
  ResultTable rmse;
  ResultTable snees;
  std::optional<ResultTable> sir;  // single-row table at sir_size
  bool any_failed_runs = false;
};

L63Results run_l63_experiment(const ExperimentConfig& cfg);

}  // namespace elkde
