#pragma once

// Reproducibility surface: scenario batches, grid search, run persistence
// and training-trend summaries.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cavoid/config_io.hpp"
#include "cavoid/conjunction.hpp"
#include "cavoid/drqn.hpp"

namespace cavoid {

/// Writes scenario_0000.yaml ... into out_dir; scenario k uses
/// derive_seed(seed, {k}). A failing scenario aborts the batch with a
/// ScenarioGenerationError carrying its index.
std::vector<std::filesystem::path> generate_scenario_batch(const ScenarioDistribution& dist, int n, std::uint64_t seed,
                                                           const std::filesystem::path& out_dir);

/// In-memory variant of generate_scenario_batch.
std::vector<ConjunctionScenario> generate_scenarios(const ScenarioDistribution& dist, int n, std::uint64_t seed);

/// Every *.yaml scenario file in dir, in file-name order.
std::vector<ConjunctionScenario> load_scenario_dir(const std::filesystem::path& dir);

/// Mean cumulative reward of the last `window` episodes (all when fewer).
double tail_mean_reward(const TrainingMetrics& metrics, int window = 20);

struct TrendReport {
  double loss_first = 0.0;
  double loss_last = 0.0;
  double reward_first = 0.0;
  double reward_last = 0.0;
  bool loss_decreased = false;
  bool reward_increased = false;
  bool passed() const { return loss_decreased && reward_increased; }
};

/// Compares the first and last `window` episodes. Loss means use only
/// episodes that ran at least one gradient step.
TrendReport training_trend(const TrainingMetrics& metrics, int window = 20);

struct RunRecord {
  TrainConfig config;
  std::size_t cell = 0;
  int repetition = 0;
  double summary = 0.0;  ///< tail_mean_reward of the persisted metrics
  bool failed = false;
  std::string error;
  std::filesystem::path run_dir;  ///< empty when nothing was persisted
};

/// One TrainConfig per grid cell, in row-major order over the parameters.
std::vector<TrainConfig> expand_grid(const GridSpec& spec, const TrainConfig& base);

/// Failed runs last; others by summary descending, ties by (cell, repetition).
std::vector<RunRecord> rank_runs(std::vector<RunRecord> runs);

using RunCallback = std::function<void(const RunRecord&)>;

/// Trains every (cell, repetition) with seed derive_seed(master_seed,
/// {cell, repetition}). With out_dir set each run is persisted under
/// out_dir/cell_XXX_rep_YY and its summary is computed from the metrics
/// file read back from disk. Training divergence marks the run failed.
std::vector<RunRecord> grid_search(const GridSpec& spec, const TrainConfig& base, const EnvConfig& env_cfg,
                                   const std::vector<ConjunctionScenario>& scenarios,
                                   const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                                   const RunCallback& on_run = {});

/// config.yaml, metrics.csv, checkpoint.bin and summary.yaml under dir.
void save_run(const std::filesystem::path& dir, const TrainConfig& train_cfg, const EnvConfig& env_cfg,
              const TrainResult& result, int tail_window = 20);

void save_ranking(const std::filesystem::path& path, const std::vector<RunRecord>& ranked);

}  // namespace cavoid
