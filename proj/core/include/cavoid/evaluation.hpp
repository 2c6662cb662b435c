#pragma once

// Policies and greedy evaluation rollouts.

#include <cstdint>
#include <memory>
#include <vector>

#include "cavoid/env.hpp"
#include "cavoid/neural.hpp"
#include "cavoid/trace_io.hpp"

namespace cavoid {

class Policy {
 public:
  virtual ~Policy() = default;
  /// Called right after env.reset().
  virtual void begin_episode(const ConjunctionEnv& env) { (void)env; }
  virtual int act(const Observation& obs) = 0;
};

/// Always the same action; index 0 coasts.
class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(int action = 0);
  int act(const Observation&) override { return action_; }

 private:
  int action_;
};

/// Greedy (epsilon = 0) recurrent Q-policy; the LSTM state is carried over
/// the whole episode.
class GreedyQPolicy final : public Policy {
 public:
  GreedyQPolicy(QNetworkParams params, int max_debris);
  void begin_episode(const ConjunctionEnv& env) override;
  int act(const Observation& obs) override;

 private:
  QNetworkParams params_;
  int max_debris_;
  RecurrentState state_;
};

/// Everything the threshold baseline needs besides the observation.
struct BaselineContext {
  EnvConfig env;
  double span = 0.0;             ///< end_time - start_time, s
  double combined_radius = 0.0;  ///< m
  double sigma_c = 0.0;          ///< m
  GravParams grav;

  static BaselineContext from_env(const ConjunctionEnv& env);
};

/// Burn of +0.1 * dv_scale along inertial x at slot 0.
int baseline_burn_action();

/// Fixed burn when the collision probability predicted from the observed
/// states exceeds the threshold (strictly), otherwise action 0.
int baseline_policy(const Observation& obs, const BaselineContext& ctx);

/// Probability the baseline acts on: max over debris of the encounter
/// probability at the TCA predicted from observed states.
double observed_collision_probability(const Observation& obs, const BaselineContext& ctx);

class ThresholdBaselinePolicy final : public Policy {
 public:
  void begin_episode(const ConjunctionEnv& env) override { ctx_ = BaselineContext::from_env(env); }
  int act(const Observation& obs) override { return baseline_policy(obs, ctx_); }

 private:
  BaselineContext ctx_;
};

struct RolloutResult {
  double cumulative_reward = 0.0;
  bool collision = false;
  double fuel_used = 0.0;
  int steps = 0;
};

RolloutResult rollout(Policy& policy, ConjunctionEnv& env, const ConjunctionScenario& scenario,
                      std::uint64_t obs_seed, std::vector<TraceRow>* trace = nullptr);

struct EvalMetrics {
  double mean_reward = 0.0;
  double std_reward = 0.0;  ///< population standard deviation
  double collision_rate = 0.0;
  double mean_fuel_used = 0.0;
  std::vector<RolloutResult> rollouts;
};

/// n_seeds rollouts per scenario with observation seeds derived from
/// (seed, scenario index, k).
EvalMetrics evaluate(Policy& policy, const std::vector<ConjunctionScenario>& scenarios, int n_seeds,
                     std::uint64_t seed, const EnvConfig& env_cfg);

}  // namespace cavoid
