#pragma once

// Synthetic conjunction scenarios built by retrograde reconstruction: pick a
// collision time, place a debris object near the protected spacecraft at
// that time, give it a rotated and noised copy of the spacecraft velocity,
// then rewind its orbit to the scenario start.

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "cavoid/orbital.hpp"
#include "cavoid/random.hpp"

namespace cavoid {

struct AngleRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const AngleRange&) const = default;
};

inline constexpr std::array<AngleRange, 2> kDefaultThetaRanges{
    {{0.01, std::numbers::pi / 8.0}, {std::numbers::pi / 8.0, std::numbers::pi / 4.0}}};

struct ScenarioConfig {
  double start_time = 0.0;       ///< s
  double end_time = 4.0 * 3600;  ///< s
  int n_debris = 1;
  double sigma_pos = 1000.0;  ///< debris placement std per axis, m
  double sigma_vr = 0.05;     ///< relative speed noise std
  std::array<AngleRange, 2> theta_ranges = kDefaultThetaRanges;
  KeplerianElements protected_elements = KeplerianElements::make(6'878'137.0, 0.001, 0.9, 0.0, 0.0, 0.0);
  double protected_radius = 10.0;  ///< m
  double debris_radius = 5.0;      ///< m
  double fuel_capacity = 20.0;     ///< fuel units (1 unit = 1 m/s of L1 delta-v)
  GravParams mu;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

struct DebrisRecord {
  KeplerianElements elements;  ///< osculating at start_time
  double collision_time = 0.0;
  StateVector collision_state;

  bool operator==(const DebrisRecord&) const = default;
};

struct ConjunctionScenario {
  ScenarioConfig config;
  std::vector<DebrisRecord> debris;

  bool operator==(const ConjunctionScenario&) const = default;
};

inline constexpr int kReconstructionRetries = 100;

double sample_collision_time(double start, double end, Rng& rng);

Vec3 place_debris_position(const Vec3& projected_pos, double sigma_pos, Rng& rng);

/// cos(theta)*vel + |vel|*sin(theta)*w_hat with w = pos x vel. Throws
/// DegenerateOrbitError when pos and vel are collinear.
Vec3 rotate_velocity(const Vec3& vel, const Vec3& pos, double theta);

double sample_theta(const std::array<AngleRange, 2>& ranges, Rng& rng);

/// Scales vel by s ~ N(1, sigma_vr); non-positive draws are redrawn.
Vec3 apply_velocity_noise(const Vec3& vel, double sigma_vr, Rng& rng);

/// std::nullopt means the collision state is not a bound orbit and the caller
/// should resample.
std::optional<DebrisRecord> reconstruct_debris(const Vec3& collision_pos, const Vec3& collision_vel,
                                               double collision_time, const ScenarioConfig& cfg);

/// Pure function of cfg (including cfg.rng_seed).
ConjunctionScenario generate_scenario(const ScenarioConfig& cfg);

/// Distribution over scenario configurations. Defaults span easy to hard
/// conjunction geometries in low Earth orbit.
struct ScenarioDistribution {
  int n_debris_min = 1;
  int n_debris_max = 3;
  double span_min = 2.0 * 3600;  ///< end_time - start_time, s
  double span_max = 6.0 * 3600;
  double sigma_pos_min = 100.0;  ///< log-uniform
  double sigma_pos_max = 2000.0;
  double sigma_vr_min = 0.01;
  double sigma_vr_max = 0.1;
  std::array<AngleRange, 2> theta_ranges = kDefaultThetaRanges;
  double sma_min = 6'778'137.0;  ///< 400 km altitude
  double sma_max = 7'378'137.0;  ///< 1000 km altitude
  double ecc_max = 0.01;
  double inc_min = 0.1;
  double inc_max = 1.7;
  double protected_radius = 10.0;
  double debris_radius = 5.0;
  double fuel_capacity = 20.0;
  GravParams mu;

  void validate() const;
  bool operator==(const ScenarioDistribution&) const = default;
};

ScenarioConfig sample_scenario_config(const ScenarioDistribution& dist, std::uint64_t seed);

}  // namespace cavoid
