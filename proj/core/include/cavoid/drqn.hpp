#pragma once

// Deep recurrent Q-learning: epsilon-greedy acting on a carried LSTM state,
// windowed replay, TD targets from a softly updated target network, and
// the episode loop that ties them to the environment.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "cavoid/conjunction.hpp"
#include "cavoid/env.hpp"
#include "cavoid/neural.hpp"
#include "cavoid/replay.hpp"

namespace cavoid {

inline constexpr double kPositionScale = 1e7;  // m
inline constexpr double kVelocityScale = 1e4;  // m/s

/// 6 + 6 * max_debris + 2 features: protected pos/vel, debris pos/vel
/// (zero-padded up to max_debris), fuel fraction, time fraction.
int observation_dim(int max_debris);
Eigen::VectorXd encode_observation(const Observation& obs, int max_debris);

struct TrainConfig {
  int batch_size = 50;
  int hidden_size = 128;
  double learning_rate = 1e-4;
  int n_episodes = 200;
  int buffer_capacity = 1000;
  double tau = 0.1;
  int n_environments = 1;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 0;  ///< 0 selects n_episodes / 2
  int seq_len = 16;
  double huber_delta = 1.0;
  /// Multiplies rewards before they enter the replay buffer. Metrics keep
  /// the unscaled environment reward.
  double reward_scale = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Linear decay from epsilon_start to epsilon_end, then flat.
double epsilon_at(const TrainConfig& cfg, int episode);

/// With probability epsilon a uniform action, otherwise the argmax with
/// ties going to the lowest index. epsilon == 0 draws nothing from rng.
int select_action(const Eigen::VectorXd& q_values, double epsilon, Rng& rng);

/// tau * online + (1 - tau) * target, element-wise.
QNetworkParams soft_update(const QNetworkParams& online, const QNetworkParams& target, double tau);
void soft_update_inplace(const QNetworkParams& online, QNetworkParams& target, double tau);

/// y = r for terminal transitions, otherwise r + gamma * max_a Q_target over
/// the window's observations followed by the last next_observation.
Eigen::VectorXd td_targets(const std::vector<SequenceSample>& batch, const QNetworkParams& target, double gamma);

/// One Adam step on the mean Huber TD loss, then a soft target update.
/// Returns the pre-update loss. Throws TrainingDivergenceError on a
/// non-finite loss or parameters.
double train_step(const std::vector<SequenceSample>& batch, QNetworkParams& online, QNetworkParams& target,
                  OptimizerState& opt, const TrainConfig& cfg);

struct EpisodeMetrics {
  int episode = 0;
  double cumulative_reward = 0.0;
  double mean_loss = 0.0;  ///< NaN when no gradient step ran in the episode
  double epsilon = 0.0;
  int steps = 0;
  int updates = 0;
  bool collision = false;
  double fuel_used = 0.0;

  bool operator==(const EpisodeMetrics& o) const;
};

struct TrainingMetrics {
  std::vector<EpisodeMetrics> episodes;
  double wall_clock_seconds = 0.0;
};

struct TrainResult {
  TrainingMetrics metrics;
  QNetworkParams params;
};

/// Called after each finished episode; useful for progress output.
using EpisodeCallback = std::function<void(const EpisodeMetrics&)>;

/// With n_environments == 1 every episode uses scenarios[0]; otherwise each
/// episode draws uniformly from the first n_environments scenarios.
TrainResult train(const TrainConfig& cfg, const EnvConfig& env_cfg, const std::vector<ConjunctionScenario>& scenarios,
                  const EpisodeCallback& on_episode = {});

NetworkShape network_shape(const TrainConfig& cfg, const EnvConfig& env_cfg);

}  // namespace cavoid
