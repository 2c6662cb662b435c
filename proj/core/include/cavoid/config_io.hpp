#pragma once

// Experiment configuration files (YAML). Every section and key is optional;
// omitted keys keep their defaults, unknown keys are rejected.
//
//   train:
//     batch_size, hidden_size, learning_rate, n_episodes, buffer_capacity,
//     tau, n_environments, gamma, epsilon_start, epsilon_end,
//     epsilon_decay_episodes, seq_len, huber_delta, reward_scale, rng_seed
//   env:
//     dt_step, sigma_obs_pos, sigma_obs_vel, dv_scale, sigma_c,
//     tca_coarse_dt, max_debris,
//     weights: {w_c, w_f, w_d, w_e, w_t}
//     thresholds: {probability, fuel_level, deviation: [a, e, i, W, w]}
//   scenario_distribution:
//     n_debris_min, n_debris_max, span_min, span_max, sigma_pos_min,
//     sigma_pos_max, sigma_vr_min, sigma_vr_max, theta_ranges, sma_min,
//     sma_max, ecc_max, inc_min, inc_max, protected_radius, debris_radius,
//     fuel_capacity, mu
//   grid:
//     parameters: {<train field>: [values...], ...}
//     repetitions, master_seed, tail_window

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cavoid/conjunction.hpp"
#include "cavoid/drqn.hpp"
#include "cavoid/env.hpp"

namespace cavoid {

struct GridSpec {
  /// Ordered (TrainConfig field name, candidate values).
  std::vector<std::pair<std::string, std::vector<double>>> parameters;
  int repetitions = 1;
  std::uint64_t master_seed = 0;
  int tail_window = 20;  ///< episodes averaged for the ranking summary

  /// Throws ConfigError for an empty grid or unknown field names.
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// batch_size {50, 100} x tau {0.05, 0.1, 0.5} x learning_rate {1e-3, 1e-4}
/// x hidden_size {64, 128}.
GridSpec default_grid();

struct ExperimentConfig {
  TrainConfig train;
  EnvConfig env;
  ScenarioDistribution scenario_distribution;
  GridSpec grid = default_grid();
};

/// Names accepted as grid parameters.
const std::vector<std::string>& train_field_names();
/// Sets a numeric TrainConfig field by name; integer fields require an
/// integral value. Throws ConfigError otherwise.
void set_train_field(TrainConfig& cfg, const std::string& name, double value);

std::string experiment_to_yaml(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_yaml(const std::string& text, const std::string& source = "<config>");
void save_experiment(const ExperimentConfig& cfg, const std::filesystem::path& path);
ExperimentConfig load_experiment(const std::filesystem::path& path);

}  // namespace cavoid
