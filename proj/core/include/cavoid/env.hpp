#pragma once

// Partially observable collision-avoidance environment.
//
// Ground truth is two-body motion of the protected spacecraft and each
// debris object. Each step the agent picks one of 625 impulsive burns
// (three thrust axes x five values, plus one of five burn instants inside
// the step). The agent only sees Gaussian-noised positions and velocities.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cavoid/conjunction.hpp"
#include "cavoid/orbital.hpp"
#include "cavoid/random.hpp"

namespace cavoid {

inline constexpr int kThrustLevels = 5;
inline constexpr int kTimeSlots = 5;
inline constexpr int kActionCount = kThrustLevels * kThrustLevels * kThrustLevels * kTimeSlots;  // 625
inline constexpr std::array<double, kThrustLevels> kThrustValues{0.0, 0.01, 0.05, 0.1, -0.05};

/// Base-5 digits of an action index.
struct ActionDigits {
  std::array<int, 3> dv{};  ///< indices into kThrustValues for x, y, z
  int time_slot = 0;
  bool operator==(const ActionDigits&) const = default;
};

struct Burn {
  Vec3 dv = Vec3::Zero();  ///< m/s
  int time_slot = 0;
};

ActionDigits action_digits(int index);
int encode_action(const ActionDigits& digits);
/// dv components are kThrustValues[digit] * dv_scale.
Burn decode_action(int index, double dv_scale = 1.0);

StateVector apply_impulse(const StateVector& state, const Vec3& dv);

struct Observation {
  Vec3 protected_pos = Vec3::Zero();
  Vec3 protected_vel = Vec3::Zero();
  std::vector<Vec3> debris_pos;
  std::vector<Vec3> debris_vel;
  double fuel_fraction = 1.0;
  double time_fraction = 0.0;

  bool operator==(const Observation&) const = default;
};

struct RewardBreakdown {
  double collision_penalty = 0.0;
  double fuel_penalty = 0.0;
  double deviation_penalty = 0.0;
  double total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

struct RewardWeights {
  double collision = 100.0;  ///< w_c
  double fuel = 1.0;         ///< w_f
  double deviation = 1.0;    ///< w_d
  double low_fuel = 5.0;     ///< w_e
  double terminal_collision = 1000.0;  ///< w_t
  bool operator==(const RewardWeights&) const = default;
};

struct RewardThresholds {
  double probability = 1e-4;
  double fuel_level = 10.0;  ///< fuel units
  /// a [m], e, i [rad], W [rad], w [rad]
  std::array<double, 5> deviation{100.0, 0.01, 0.01, 0.01, 0.01};
  bool operator==(const RewardThresholds&) const = default;
};

struct EnvConfig {
  double dt_step = 100.0;        ///< s
  double sigma_obs_pos = 100.0;  ///< m
  double sigma_obs_vel = 0.1;    ///< m/s
  double dv_scale = 1.0;         ///< m/s per thrust unit
  RewardWeights weights;
  RewardThresholds thresholds;
  /// Combined positional uncertainty for the probability model. Values <= 0
  /// select sqrt(sigma_obs_pos^2 + scenario sigma_pos^2).
  double sigma_c = 0.0;
  double tca_coarse_dt = 20.0;  ///< s
  int max_debris = 3;           ///< observation slots for the agent

  void validate() const;
  bool operator==(const EnvConfig&) const = default;
};

/// Isotropic encounter-plane approximation
///   p = min(1, R^2 / (2 sigma^2) * exp(-d^2 / (2 sigma^2))).
/// sigma_c == 0 degenerates to the hard-body indicator d <= R.
double collision_probability(double miss_distance, double combined_radius, double sigma_c);

struct ClosestApproach {
  double time = 0.0;      ///< offset from the search start, in [0, horizon]
  double distance = 0.0;  ///< m
};

/// Coarse scan over [t0, t0 + horizon] at coarse_dt, then golden-section
/// refinement around every coarse local minimum.
ClosestApproach find_tca(const Propagator& prop, const OrbitAtEpoch& a, const OrbitAtEpoch& b, double t0,
                         double horizon, double coarse_dt);

/// Reward from already-evaluated terms. `fuel_used` is in fuel units.
RewardBreakdown reward_from_terms(double probability, double fuel_used, double fuel_remaining,
                                  double fuel_capacity, const KeplerianElements& current,
                                  const KeplerianElements& reference, const RewardWeights& weights,
                                  const RewardThresholds& thresholds);

struct PendingImpulse {
  double time = 0.0;  ///< absolute s
  Vec3 dv = Vec3::Zero();
};

struct EnvState {
  StateVector protected_state;
  OrbitAtEpoch protected_orbit;  ///< osculating orbit since the last burn
  std::vector<StateVector> debris_states;
  std::vector<OrbitAtEpoch> debris_orbits;
  double fuel_remaining = 0.0;
  double fuel_capacity = 0.0;
  KeplerianElements reference_elements;
  int step_index = 0;
  int horizon = 0;  ///< number of steps in the episode
  double time = 0.0;
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<PendingImpulse> pending;
};

/// Noised copy of the true state. Fuel and time fractions are exact.
Observation observe(const EnvState& state, double sigma_obs_pos, double sigma_obs_vel, Rng& rng);

struct StepInfo {
  bool collision = false;
  bool time_up = false;
  bool fuel_exhausted = false;
  double fuel_used = 0.0;         ///< fuel units spent this step
  double min_distance = 0.0;      ///< closest true approach during the step, m
  double max_probability = 0.0;   ///< collision probability used by the reward
};

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
  StepInfo info;
};

class ConjunctionEnv {
 public:
  explicit ConjunctionEnv(EnvConfig cfg = {}, std::shared_ptr<const Propagator> propagator = nullptr);

  /// Starts an episode at the scenario start with full fuel.
  Observation reset(const ConjunctionScenario& scenario, std::uint64_t obs_seed);

  /// Throws LifecycleError when no episode is running.
  StepResult step(int action_index);

  /// Reward for the current state given the fuel spent on the last action.
  RewardBreakdown compute_reward(double fuel_used) const;
  double max_collision_probability() const;

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  const ConjunctionScenario& scenario() const { return scenario_; }
  bool done() const { return done_; }
  bool started() const { return started_; }
  double sigma_c() const { return sigma_c_; }
  double combined_radius() const;

 private:
  double min_distance_over(const OrbitAtEpoch& prot, double t0, double span) const;

  EnvConfig cfg_;
  std::shared_ptr<const Propagator> prop_;
  ConjunctionScenario scenario_;
  EnvState state_;
  Rng obs_rng_;
  double sigma_c_ = 0.0;
  bool started_ = false;
  bool done_ = false;
};

/// sigma_c used for a scenario under cfg.
double combined_sigma(const EnvConfig& cfg, const ScenarioConfig& scenario);

}  // namespace cavoid
