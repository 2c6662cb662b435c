#include "cavoid/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cavoid/errors.hpp"

namespace cavoid {
namespace {

constexpr double kGoldenRatio = 0.6180339887498949;  // 1/phi
constexpr double kTcaTimeTol = 1e-6;                 // s

double distance_at(const Propagator& prop, const OrbitAtEpoch& a, const OrbitAtEpoch& b, double t) {
  return (prop.state_at(a, t).position - prop.state_at(b, t).position).norm();
}

// Minimum of a unimodal function on [lo, hi].
template <typename F>
std::pair<double, double> golden_section(F&& f, double lo, double hi) {
  double x1 = hi - kGoldenRatio * (hi - lo);
  double x2 = lo + kGoldenRatio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > kTcaTimeTol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGoldenRatio * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGoldenRatio * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

ActionDigits action_digits(int index) {
  if (index < 0 || index >= kActionCount) {
    throw DomainError("action index out of range: " + std::to_string(index));
  }
  ActionDigits d;
  d.time_slot = index % kTimeSlots;
  index /= kTimeSlots;
  d.dv[2] = index % kThrustLevels;
  index /= kThrustLevels;
  d.dv[1] = index % kThrustLevels;
  d.dv[0] = index / kThrustLevels;
  return d;
}

int encode_action(const ActionDigits& digits) {
  for (int v : digits.dv) {
    if (v < 0 || v >= kThrustLevels) throw DomainError("thrust digit out of range");
  }
  if (digits.time_slot < 0 || digits.time_slot >= kTimeSlots) throw DomainError("time slot out of range");
  return ((digits.dv[0] * kThrustLevels + digits.dv[1]) * kThrustLevels + digits.dv[2]) * kTimeSlots +
         digits.time_slot;
}

Burn decode_action(int index, double dv_scale) {
  const ActionDigits d = action_digits(index);
  Burn b;
  for (int k = 0; k < 3; ++k) b.dv[k] = kThrustValues[static_cast<std::size_t>(d.dv[static_cast<std::size_t>(k)])] * dv_scale;
  b.time_slot = d.time_slot;
  return b;
}

StateVector apply_impulse(const StateVector& state, const Vec3& dv) {
  StateVector out = state;
  out.velocity += dv;
  return out;
}

void EnvConfig::validate() const {
  if (!(dt_step > 0.0)) throw ConfigError("dt_step must be positive");
  if (!(sigma_obs_pos >= 0.0 && sigma_obs_vel >= 0.0)) throw ConfigError("observation sigmas must be >= 0");
  if (!(dv_scale > 0.0)) throw ConfigError("dv_scale must be positive");
  if (!(tca_coarse_dt > 0.0)) throw ConfigError("tca_coarse_dt must be positive");
  if (max_debris < 1) throw ConfigError("max_debris must be at least 1");
  if (!(thresholds.probability > 0.0)) throw ConfigError("probability threshold must be positive");
  for (double t : thresholds.deviation) {
    if (!(t > 0.0)) throw ConfigError("deviation thresholds must be positive");
  }
}

double collision_probability(double miss_distance, double combined_radius, double sigma_c) {
  if (!(miss_distance >= 0.0 && combined_radius >= 0.0 && sigma_c >= 0.0)) {
    throw DomainError("collision_probability inputs must be non-negative");
  }
  if (sigma_c == 0.0) return miss_distance <= combined_radius ? 1.0 : 0.0;
  const double two_var = 2.0 * sigma_c * sigma_c;
  const double p = combined_radius * combined_radius / two_var *
                   std::exp(-miss_distance * miss_distance / two_var);
  return std::min(1.0, p);
}

ClosestApproach find_tca(const Propagator& prop, const OrbitAtEpoch& a, const OrbitAtEpoch& b, double t0,
                         double horizon, double coarse_dt) {
  if (!(horizon >= 0.0)) throw DomainError("TCA horizon must be non-negative");
  if (!(coarse_dt > 0.0)) throw DomainError("TCA coarse step must be positive");

  auto dist = [&](double offset) { return distance_at(prop, a, b, t0 + offset); };
  if (horizon == 0.0) return {0.0, dist(0.0)};

  const auto n = static_cast<std::size_t>(std::ceil(horizon / coarse_dt));
  std::vector<double> ts(n + 1);
  std::vector<double> ds(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    ts[k] = std::min(static_cast<double>(k) * coarse_dt, horizon);
    ds[k] = dist(ts[k]);
  }

  ClosestApproach best{ts[0], ds[0]};
  for (std::size_t k = 1; k <= n; ++k) {
    if (ds[k] < best.distance) best = {ts[k], ds[k]};
  }

  for (std::size_t k = 0; k <= n; ++k) {
    const bool left_ok = k == 0 || ds[k] <= ds[k - 1];
    const bool right_ok = k == n || ds[k] <= ds[k + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = k == 0 ? ts[0] : ts[k - 1];
    const double hi = k == n ? ts[n] : ts[k + 1];
    if (!(hi > lo)) continue;
    const auto [t, d] = golden_section(dist, lo, hi);
    if (d < best.distance) best = {t, d};
  }
  return best;
}

RewardBreakdown reward_from_terms(double probability, double fuel_used, double fuel_remaining,
                                  double fuel_capacity, const KeplerianElements& current,
                                  const KeplerianElements& reference, const RewardWeights& weights,
                                  const RewardThresholds& thresholds) {
  RewardBreakdown r;
  if (probability > thresholds.probability) {
    r.collision_penalty = -weights.collision * (1.0 + std::log10(probability / thresholds.probability));
  }

  if (fuel_used > 0.0) {
    r.fuel_penalty = -weights.fuel * fuel_used / fuel_capacity;
    if (fuel_remaining < thresholds.fuel_level) r.fuel_penalty -= weights.low_fuel;
  }

  const std::array<double, 5> delta{
      current.a - reference.a,
      current.e - reference.e,
      current.i - reference.i,
      wrap_pi(current.W - reference.W),
      wrap_pi(current.w - reference.w),
  };
  double dev = 0.0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double excess = std::abs(delta[k]) - thresholds.deviation[k];
    if (excess > 0.0) dev += excess / thresholds.deviation[k];
  }
  if (dev > 0.0) r.deviation_penalty = -weights.deviation * dev;

  r.total = r.collision_penalty + r.fuel_penalty + r.deviation_penalty;
  return r;
}

Observation observe(const EnvState& state, double sigma_obs_pos, double sigma_obs_vel, Rng& rng) {
  if (!(sigma_obs_pos >= 0.0 && sigma_obs_vel >= 0.0)) throw DomainError("observation sigmas must be >= 0");
  std::normal_distribution<double> unit(0.0, 1.0);
  auto noisy = [&](const Vec3& v, double sigma) {
    Vec3 out = v;
    if (sigma > 0.0) {
      for (int k = 0; k < 3; ++k) out[k] += sigma * unit(rng);
    }
    return out;
  };

  Observation obs;
  obs.protected_pos = noisy(state.protected_state.position, sigma_obs_pos);
  obs.protected_vel = noisy(state.protected_state.velocity, sigma_obs_vel);
  obs.debris_pos.reserve(state.debris_states.size());
  obs.debris_vel.reserve(state.debris_states.size());
  for (const auto& d : state.debris_states) {
    obs.debris_pos.push_back(noisy(d.position, sigma_obs_pos));
    obs.debris_vel.push_back(noisy(d.velocity, sigma_obs_vel));
  }
  obs.fuel_fraction = std::clamp(state.fuel_remaining / state.fuel_capacity, 0.0, 1.0);
  const double span = state.end_time - state.start_time;
  obs.time_fraction = span > 0.0 ? std::clamp((state.time - state.start_time) / span, 0.0, 1.0) : 1.0;
  return obs;
}

double combined_sigma(const EnvConfig& cfg, const ScenarioConfig& scenario) {
  if (cfg.sigma_c > 0.0) return cfg.sigma_c;
  return std::hypot(cfg.sigma_obs_pos, scenario.sigma_pos);
}

ConjunctionEnv::ConjunctionEnv(EnvConfig cfg, std::shared_ptr<const Propagator> propagator)
    : cfg_(cfg), prop_(std::move(propagator)) {
  cfg_.validate();
}

double ConjunctionEnv::combined_radius() const {
  return scenario_.config.protected_radius + scenario_.config.debris_radius;
}

Observation ConjunctionEnv::reset(const ConjunctionScenario& scenario, std::uint64_t obs_seed) {
  scenario.config.validate();
  if (static_cast<int>(scenario.debris.size()) != scenario.config.n_debris) {
    throw ConfigError("scenario debris count does not match n_debris");
  }
  scenario_ = scenario;
  const ScenarioConfig& sc = scenario_.config;
  if (!prop_ || [&] {
        auto* tb = dynamic_cast<const TwoBodyPropagator*>(prop_.get());
        return tb && !(tb->grav() == sc.mu);
      }()) {
    prop_ = std::make_shared<TwoBodyPropagator>(sc.mu);
  }

  state_ = EnvState{};
  state_.start_time = sc.start_time;
  state_.end_time = sc.end_time;
  state_.time = sc.start_time;
  state_.fuel_capacity = sc.fuel_capacity;
  state_.fuel_remaining = sc.fuel_capacity;
  state_.reference_elements = sc.protected_elements;
  state_.protected_orbit = {sc.protected_elements, sc.start_time};
  state_.protected_state = prop_->state_at(state_.protected_orbit, sc.start_time);
  state_.step_index = 0;
  state_.horizon = static_cast<int>(std::ceil((sc.end_time - sc.start_time) / cfg_.dt_step));
  for (const auto& d : scenario_.debris) {
    state_.debris_orbits.push_back({d.elements, sc.start_time});
    state_.debris_states.push_back(prop_->state_at(state_.debris_orbits.back(), sc.start_time));
  }

  sigma_c_ = combined_sigma(cfg_, sc);
  obs_rng_.seed(obs_seed);
  started_ = true;
  done_ = false;
  return observe(state_, cfg_.sigma_obs_pos, cfg_.sigma_obs_vel, obs_rng_);
}

double ConjunctionEnv::min_distance_over(const OrbitAtEpoch& prot, double t0, double span) const {
  double best = std::numeric_limits<double>::infinity();
  const double coarse = std::min(cfg_.tca_coarse_dt, std::max(span, 1e-9));
  for (const auto& deb : state_.debris_orbits) {
    best = std::min(best, find_tca(*prop_, prot, deb, t0, span, coarse).distance);
  }
  return best;
}

double ConjunctionEnv::max_collision_probability() const {
  const double remaining = std::max(0.0, state_.end_time - state_.time);
  double p = 0.0;
  for (const auto& deb : state_.debris_orbits) {
    const ClosestApproach tca =
        find_tca(*prop_, state_.protected_orbit, deb, state_.time, remaining, cfg_.tca_coarse_dt);
    p = std::max(p, collision_probability(tca.distance, combined_radius(), sigma_c_));
  }
  return p;
}

RewardBreakdown ConjunctionEnv::compute_reward(double fuel_used) const {
  return reward_from_terms(max_collision_probability(), fuel_used, state_.fuel_remaining,
                           state_.fuel_capacity, state_.protected_orbit.elements, state_.reference_elements,
                           cfg_.weights, cfg_.thresholds);
}

StepResult ConjunctionEnv::step(int action_index) {
  if (!started_) throw LifecycleError("step() called before reset()");
  if (done_) throw LifecycleError("step() called after the episode finished");

  Burn burn = decode_action(action_index, cfg_.dv_scale);
  const double t0 = state_.time;
  const double dt = std::min(cfg_.dt_step, state_.end_time - t0);
  const double offset = std::min(burn.time_slot * cfg_.dt_step / kTimeSlots, dt);

  double fuel_used = burn.dv.lpNorm<1>() / cfg_.dv_scale;
  if (fuel_used > state_.fuel_remaining) {
    // Partial burn with whatever is left.
    const double scale = state_.fuel_remaining / fuel_used;
    burn.dv *= scale;
    fuel_used = state_.fuel_remaining;
  }

  StepInfo info;
  info.fuel_used = fuel_used;
  double min_dist = std::numeric_limits<double>::infinity();

  if (fuel_used > 0.0) {
    state_.pending.push_back({t0 + offset, burn.dv});
  }
  // Coast segment by segment, firing pending impulses at their instants.
  double t = t0;
  for (const PendingImpulse& imp : state_.pending) {
    if (imp.time > t) {
      min_dist = std::min(min_dist, min_distance_over(state_.protected_orbit, t, imp.time - t));
      t = imp.time;
    }
    const StateVector at_burn = apply_impulse(prop_->state_at(state_.protected_orbit, t), imp.dv);
    state_.protected_orbit = {state_to_elements(at_burn, scenario_.config.mu), t};
  }
  state_.pending.clear();
  const double t_end = t0 + dt;
  min_dist = std::min(min_dist, min_distance_over(state_.protected_orbit, t, t_end - t));

  state_.fuel_remaining = std::max(0.0, state_.fuel_remaining - fuel_used);
  state_.time = state_.step_index + 1 == state_.horizon ? state_.end_time : t_end;
  state_.step_index += 1;
  state_.protected_state = prop_->state_at(state_.protected_orbit, state_.time);
  for (std::size_t k = 0; k < state_.debris_orbits.size(); ++k) {
    state_.debris_states[k] = prop_->state_at(state_.debris_orbits[k], state_.time);
  }

  info.min_distance = min_dist;
  info.collision = min_dist < combined_radius();
  info.time_up = state_.time >= state_.end_time;
  info.fuel_exhausted = state_.fuel_remaining <= 0.0;
  info.max_probability = max_collision_probability();

  StepResult result;
  result.reward = reward_from_terms(info.max_probability, fuel_used, state_.fuel_remaining,
                                    state_.fuel_capacity, state_.protected_orbit.elements,
                                    state_.reference_elements, cfg_.weights, cfg_.thresholds);
  if (info.collision) {
    result.reward.collision_penalty -= cfg_.weights.terminal_collision;
    result.reward.total =
        result.reward.collision_penalty + result.reward.fuel_penalty + result.reward.deviation_penalty;
  }
  result.done = info.collision || info.time_up || info.fuel_exhausted;
  result.info = info;
  done_ = result.done;
  result.observation = observe(state_, cfg_.sigma_obs_pos, cfg_.sigma_obs_vel, obs_rng_);
  return result;
}

}  // namespace cavoid
