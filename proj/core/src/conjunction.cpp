#include "cavoid/conjunction.hpp"

#include <cmath>
#include <string>

#include "cavoid/errors.hpp"

namespace cavoid {
namespace {

void check_ranges(const std::array<AngleRange, 2>& ranges) {
  for (const auto& r : ranges) {
    if (!(r.lo <= r.hi)) throw DomainError("empty theta interval");
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(start_time < end_time)) throw ConfigError("start_time must precede end_time");
  if (n_debris < 1) throw ConfigError("n_debris must be at least 1");
  if (!(sigma_pos >= 0.0)) throw ConfigError("sigma_pos must be non-negative");
  if (!(sigma_vr >= 0.0)) throw ConfigError("sigma_vr must be non-negative");
  for (const auto& r : theta_ranges) {
    if (!(r.lo > 0.0 && r.lo <= r.hi && r.hi < std::numbers::pi)) {
      throw ConfigError("theta_ranges must be non-empty sub-intervals of (0, pi)");
    }
  }
  if (!(protected_radius >= 0.0 && debris_radius >= 0.0)) {
    throw ConfigError("object radii must be non-negative");
  }
  if (!(fuel_capacity > 0.0)) throw ConfigError("fuel_capacity must be positive");
  if (!(mu.mu_central_body > 0.0)) throw ConfigError("mu must be positive");
  // Re-run the element checks in case the struct was filled field by field.
  const auto& k = protected_elements;
  (void)KeplerianElements::make(k.a, k.e, k.i, k.W, k.w, k.M);
}

double sample_collision_time(double start, double end, Rng& rng) {
  if (start > end) throw DomainError("collision time interval is reversed");
  if (start == end) return start;
  std::uniform_real_distribution<double> dist(start, end);
  return dist(rng);
}

Vec3 place_debris_position(const Vec3& projected_pos, double sigma_pos, Rng& rng) {
  if (!(sigma_pos >= 0.0)) throw DomainError("sigma_pos must be non-negative");
  if (sigma_pos == 0.0) return projected_pos;
  std::normal_distribution<double> noise(0.0, sigma_pos);
  Vec3 out = projected_pos;
  for (int k = 0; k < 3; ++k) out[k] += noise(rng);
  return out;
}

Vec3 rotate_velocity(const Vec3& vel, const Vec3& pos, double theta) {
  const Vec3 w = pos.cross(vel);
  const double wn = w.norm();
  if (!(wn > 0.0)) throw DegenerateOrbitError("position and velocity are collinear");
  return std::cos(theta) * vel + vel.norm() * std::sin(theta) * (w / wn);
}

double sample_theta(const std::array<AngleRange, 2>& ranges, Rng& rng) {
  check_ranges(ranges);
  std::bernoulli_distribution pick_second(0.5);
  const AngleRange& r = pick_second(rng) ? ranges[1] : ranges[0];
  if (r.lo == r.hi) return r.lo;
  std::uniform_real_distribution<double> dist(r.lo, r.hi);
  return dist(rng);
}

Vec3 apply_velocity_noise(const Vec3& vel, double sigma_vr, Rng& rng) {
  if (!(sigma_vr >= 0.0)) throw DomainError("sigma_vr must be non-negative");
  if (sigma_vr == 0.0) return vel;
  std::normal_distribution<double> scale(1.0, sigma_vr);
  double s = scale(rng);
  while (s <= 0.0) s = scale(rng);
  return s * vel;
}

std::optional<DebrisRecord> reconstruct_debris(const Vec3& collision_pos, const Vec3& collision_vel,
                                               double collision_time, const ScenarioConfig& cfg) {
  StateVector at_collision{collision_pos, collision_vel, collision_time};
  KeplerianElements kep;
  try {
    kep = state_to_elements(at_collision, cfg.mu);
  } catch (const OrbitError&) {
    return std::nullopt;
  }
  const double rewind = mean_motion(kep.a, cfg.mu) * (collision_time - cfg.start_time);
  kep.M = wrap_two_pi(kep.M - rewind);
  return DebrisRecord{kep, collision_time, at_collision};
}

ConjunctionScenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);
  const TwoBodyPropagator prop(cfg.mu);

  ConjunctionScenario scenario{cfg, {}};
  scenario.debris.reserve(static_cast<std::size_t>(cfg.n_debris));
  for (int d = 0; d < cfg.n_debris; ++d) {
    std::optional<DebrisRecord> record;
    for (int attempt = 0; attempt < kReconstructionRetries && !record; ++attempt) {
      const double t_c = sample_collision_time(cfg.start_time, cfg.end_time, rng);
      const StateVector projected = prop.propagate(cfg.protected_elements, t_c - cfg.start_time);
      const Vec3 pos = place_debris_position(projected.position, cfg.sigma_pos, rng);
      const double theta = sample_theta(cfg.theta_ranges, rng);
      const Vec3 vel = apply_velocity_noise(
          rotate_velocity(projected.velocity, projected.position, theta), cfg.sigma_vr, rng);
      record = reconstruct_debris(pos, vel, t_c, cfg);
    }
    if (!record) {
      throw ScenarioGenerationError("debris " + std::to_string(d) + " could not be reconstructed after " +
                                        std::to_string(kReconstructionRetries) + " attempts",
                                    static_cast<std::size_t>(d));
    }
    scenario.debris.push_back(*record);
  }
  return scenario;
}

void ScenarioDistribution::validate() const {
  if (n_debris_min < 1 || n_debris_max < n_debris_min) throw ConfigError("bad n_debris range");
  if (!(span_min > 0.0 && span_min <= span_max)) throw ConfigError("bad span range");
  if (!(sigma_pos_min > 0.0 && sigma_pos_min <= sigma_pos_max)) {
    throw ConfigError("sigma_pos range must be positive for log-uniform sampling");
  }
  if (!(sigma_vr_min >= 0.0 && sigma_vr_min <= sigma_vr_max)) throw ConfigError("bad sigma_vr range");
  if (!(sma_min > 0.0 && sma_min <= sma_max)) throw ConfigError("bad semi-major axis range");
  if (!(ecc_max >= 0.0 && ecc_max < 1.0)) throw ConfigError("bad eccentricity bound");
  if (!(inc_min >= 0.0 && inc_min <= inc_max && inc_max <= std::numbers::pi)) {
    throw ConfigError("bad inclination range");
  }
}

ScenarioConfig sample_scenario_config(const ScenarioDistribution& dist, std::uint64_t seed) {
  dist.validate();
  Rng rng(seed);
  auto uniform = [&](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  ScenarioConfig cfg;
  cfg.start_time = 0.0;
  cfg.end_time = uniform(dist.span_min, dist.span_max);
  cfg.n_debris = std::uniform_int_distribution<int>(dist.n_debris_min, dist.n_debris_max)(rng);
  cfg.sigma_pos = std::exp(uniform(std::log(dist.sigma_pos_min), std::log(dist.sigma_pos_max)));
  cfg.sigma_vr = uniform(dist.sigma_vr_min, dist.sigma_vr_max);
  cfg.theta_ranges = dist.theta_ranges;
  cfg.protected_elements = KeplerianElements::make(
      uniform(dist.sma_min, dist.sma_max), uniform(0.0, dist.ecc_max), uniform(dist.inc_min, dist.inc_max),
      uniform(0.0, kTwoPi), uniform(0.0, kTwoPi), uniform(0.0, kTwoPi));
  cfg.protected_radius = dist.protected_radius;
  cfg.debris_radius = dist.debris_radius;
  cfg.fuel_capacity = dist.fuel_capacity;
  cfg.mu = dist.mu;
  cfg.rng_seed = derive_seed(seed, {1});
  return cfg;
}

}  // namespace cavoid
