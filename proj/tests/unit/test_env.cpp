#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cavoid/env.hpp"
#include "cavoid/errors.hpp"
#include "cavoid/trace_io.hpp"
#include "oracles/dense_tca.hpp"
#include "oracles/monte_carlo_pc.hpp"
#include "oracles/statistics.hpp"

using namespace cavoid;

namespace {

EnvConfig noise_free() {
  EnvConfig cfg;
  cfg.sigma_obs_pos = 0.0;
  cfg.sigma_obs_vel = 0.0;
  return cfg;
}

// Debris placed exactly on the protected object at the collision time with
// a rotated velocity: a guaranteed hit when nothing manoeuvres.
ConjunctionScenario direct_hit(double t_c, double end_time = 4 * 3600.0) {
  ScenarioConfig cfg;
  cfg.end_time = end_time;
  cfg.sigma_pos = 0.0;
  cfg.sigma_vr = 0.0;
  const StateVector p = propagate(cfg.protected_elements, t_c, cfg.mu);
  const auto rec = reconstruct_debris(p.position, rotate_velocity(p.velocity, p.position, 0.3), t_c, cfg);
  return {cfg, {*rec}};
}

// Same orbit shape as the protected object but far along track: no threat.
ConjunctionScenario far_miss() {
  ScenarioConfig cfg;
  auto k = cfg.protected_elements;
  k.M = wrap_two_pi(k.M + 2.0);
  k.i += 0.3;
  return {cfg, {DebrisRecord{k, 0.0, elements_to_state(k, cfg.mu)}}};
}

KeplerianElements shifted(KeplerianElements k, int which, double by) {
  switch (which) {
    case 0: k.a += by; break;
    case 1: k.e += by; break;
    case 2: k.i += by; break;
    case 3: k.W = wrap_two_pi(k.W + by); break;
    default: k.w = wrap_two_pi(k.w + by); break;
  }
  return k;
}

}  // namespace

TEST(ActionCodec, EndpointsAndValueTable) {
  const Burn zero = decode_action(0);
  EXPECT_EQ(zero.dv, Vec3::Zero());
  EXPECT_EQ(zero.time_slot, 0);
  const Burn last = decode_action(624, 2.0);
  EXPECT_EQ(last.dv, Vec3(-0.1, -0.1, -0.1));
  EXPECT_EQ(last.time_slot, 4);
  EXPECT_EQ(kActionCount, 625);
}

TEST(ActionCodec, ExhaustiveBijection) {
  std::set<std::array<int, 4>> seen;
  for (int i = 0; i < kActionCount; ++i) {
    const ActionDigits d = action_digits(i);
    EXPECT_EQ(encode_action(d), i);
    EXPECT_EQ(i, ((d.dv[0] * 5 + d.dv[1]) * 5 + d.dv[2]) * 5 + d.time_slot);
    seen.insert({d.dv[0], d.dv[1], d.dv[2], d.time_slot});
  }
  EXPECT_EQ(seen.size(), 625u);
}

TEST(ActionCodec, OutOfRangeThrows) {
  EXPECT_THROW(decode_action(-1), DomainError);
  EXPECT_THROW(decode_action(625), DomainError);
  EXPECT_THROW(encode_action({{5, 0, 0}, 0}), DomainError);
}

TEST(ApplyImpulse, ZeroAndAdditive) {
  StateVector s{Vec3(7e6, 0, 0), Vec3(0, 7500, 0), 12.0};
  EXPECT_EQ(apply_impulse(s, Vec3::Zero()), s);
  const StateVector twice = apply_impulse(apply_impulse(s, Vec3(1, 0, 0)), Vec3(1, 0, 0));
  EXPECT_EQ(twice.velocity.x(), 2.0);
  EXPECT_EQ(twice.position, s.position);
  EXPECT_EQ(twice.epoch, s.epoch);
}

TEST(ApplyImpulse, ProgradeRaisesSemiMajorAxis) {
  const GravParams grav;
  const StateVector s = elements_to_state(KeplerianElements::make(7e6, 0, 0.5, 0, 0, 0), grav);
  const StateVector burned = apply_impulse(s, 0.1 * s.velocity.normalized());
  const double a_new = state_to_elements(burned, grav).a;
  // Vis-viva: a = 1 / (2/r - v^2/mu).
  const double expect = 1.0 / (2.0 / s.position.norm() - burned.velocity.squaredNorm() / grav.mu_central_body);
  EXPECT_GT(a_new, 7e6);
  EXPECT_NEAR(a_new, expect, 1e-6);
}

TEST(CollisionProbability, KnownValues) {
  EXPECT_DOUBLE_EQ(collision_probability(0.0, 10.0, 1000.0), 5e-5);
  EXPECT_LT(collision_probability(1e5, 10.0, 1000.0), 1e-300);
  EXPECT_EQ(collision_probability(0.0, 5000.0, 10.0), 1.0);
  EXPECT_EQ(collision_probability(3.0, 5.0, 0.0), 1.0);
  EXPECT_EQ(collision_probability(6.0, 5.0, 0.0), 0.0);
  EXPECT_THROW(collision_probability(-1.0, 5.0, 1.0), DomainError);
}

TEST(CollisionProbability, AgreesWithMonteCarlo) {
  const double sigma = 1.0, R = 0.05;
  for (double d : {0.0, 1.0, 2.0}) {
    const double mc = oracle::monte_carlo_collision_probability(d, R, sigma, 4'000'000, 17 + static_cast<int>(d));
    EXPECT_NEAR(collision_probability(d, R, sigma) / mc, 1.0, 0.15) << "d=" << d;
  }
}

TEST(CollisionProbability, MonotoneInDistanceAndRadius) {
  double prev = 2.0;
  for (int k = 0; k < 100; ++k) {
    const double p = collision_probability(k * 50.0, 15.0, 1000.0);
    EXPECT_LE(p, prev);
    prev = p;
  }
  prev = -1.0;
  for (int k = 0; k < 100; ++k) {
    const double p = collision_probability(500.0, k * 2.0, 1000.0);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(FindTca, IdenticalOrbits) {
  TwoBodyPropagator prop;
  const auto k = KeplerianElements::make(7e6, 0.01, 0.4, 0.1, 0.2, 0.3);
  const auto tca = find_tca(prop, {k, 0.0}, {k, 0.0}, 0.0, 3600.0, 20.0);
  EXPECT_EQ(tca.distance, 0.0);
  EXPECT_EQ(tca.time, 0.0);
}

TEST(FindTca, ConstructedCollisionMatchesDenseOracle) {
  for (double t_c : {1234.5, 5000.0, 9999.9}) {
    const auto sc = direct_hit(t_c);
    TwoBodyPropagator prop(sc.config.mu);
    const OrbitAtEpoch a{sc.config.protected_elements, 0.0}, b{sc.debris[0].elements, 0.0};
    const auto tca = find_tca(prop, a, b, 0.0, sc.config.end_time, 20.0);
    const auto dense = oracle::dense_min_distance(a.elements, b.elements, sc.config.end_time, 1.0);
    EXPECT_NEAR(tca.time, t_c, 20.0);
    EXPECT_LE(tca.distance, dense.distance + 1e-6);
    EXPECT_LT(tca.distance, 1.0);
    EXPECT_GE(tca.time, 0.0);
    EXPECT_LE(tca.time, sc.config.end_time);
  }
}

TEST(FindTca, NeverWorseThanCoarseSamplesAndInBounds) {
  TwoBodyPropagator prop;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioConfig cfg;
    cfg.rng_seed = seed;
    const auto sc = generate_scenario(cfg);
    const OrbitAtEpoch a{cfg.protected_elements, 0.0}, b{sc.debris[0].elements, 0.0};
    const double horizon = 7000.0;
    const auto tca = find_tca(prop, a, b, 0.0, horizon, 20.0);
    EXPECT_GE(tca.time, 0.0);
    EXPECT_LE(tca.time, horizon);
    const auto coarse = oracle::dense_min_distance(a.elements, b.elements, horizon, 20.0);
    EXPECT_LE(tca.distance, coarse.distance);
  }
}

TEST(Reward, AllInactiveGivesZero) {
  const auto ref = KeplerianElements::make(7e6, 0.001, 0.9, 1, 1, 1);
  const auto r = reward_from_terms(1e-4, 0.0, 20.0, 20.0, ref, ref, {}, {});
  EXPECT_EQ(r.total, 0.0);
  EXPECT_EQ(r.collision_penalty, 0.0);
  EXPECT_EQ(r.fuel_penalty, 0.0);
  EXPECT_EQ(r.deviation_penalty, 0.0);
}

TEST(Reward, ThresholdsExactlyMetAreInactive) {
  // Zero reference values keep element + threshold - reference exact.
  KeplerianElements ref;
  ref.a = 7e6;
  const RewardThresholds th;
  for (int k = 0; k < 5; ++k) {
    const auto cur = shifted(ref, k, th.deviation[static_cast<std::size_t>(k)]);
    EXPECT_EQ(reward_from_terms(1e-4, 0.0, 20.0, 20.0, cur, ref, {}, th).total, 0.0) << k;
    const auto past = shifted(ref, k, th.deviation[static_cast<std::size_t>(k)] * (1.0 + 1e-9));
    EXPECT_LT(reward_from_terms(1e-4, 0.0, 20.0, 20.0, past, ref, {}, th).deviation_penalty, 0.0) << k;
  }
  EXPECT_LT(reward_from_terms(std::nextafter(1e-4, 1.0), 0.0, 20.0, 20.0, ref, ref, {}, th).collision_penalty, 0.0);
}

TEST(Reward, EachComponentActivatesIndependently) {
  const auto ref = KeplerianElements::make(7e6, 0.05, 0.9, 1, 1, 1);
  const RewardThresholds th;
  const RewardWeights w;
  const auto coll = reward_from_terms(1e-3, 0.0, 20.0, 20.0, ref, ref, w, th);
  EXPECT_NEAR(coll.collision_penalty, -200.0, 1e-12);
  EXPECT_EQ(coll.fuel_penalty, 0.0);
  EXPECT_EQ(coll.deviation_penalty, 0.0);

  const auto fuel = reward_from_terms(0.0, 0.15, 19.85, 20.0, ref, ref, w, th);
  EXPECT_DOUBLE_EQ(fuel.fuel_penalty, -0.15 / 20.0);
  EXPECT_EQ(fuel.collision_penalty + fuel.deviation_penalty, 0.0);

  const auto low = reward_from_terms(0.0, 0.15, 9.5, 20.0, ref, ref, w, th);
  EXPECT_DOUBLE_EQ(low.fuel_penalty, -0.15 / 20.0 - 5.0);

  for (int k = 0; k < 5; ++k) {
    const double t = th.deviation[static_cast<std::size_t>(k)];
    const auto r = reward_from_terms(0.0, 0.0, 20.0, 20.0, shifted(ref, k, 3.0 * t), ref, w, th);
    EXPECT_NEAR(r.deviation_penalty, -2.0, 1e-6) << k;
    EXPECT_EQ(r.collision_penalty + r.fuel_penalty, 0.0);
    EXPECT_EQ(r.total, r.deviation_penalty);
  }
}

TEST(Observe, NoiseFreeAndStatistics) {
  EnvState st;
  st.protected_state = {Vec3(7e6, 1, 2), Vec3(3, 7500, 4), 0};
  st.debris_states = {StateVector{Vec3(7e6, 100, 0), Vec3(0, -7500, 1), 0}};
  st.fuel_capacity = 20;
  st.fuel_remaining = 20;
  st.start_time = 0;
  st.end_time = 100;
  Rng rng(3);
  const Observation o = observe(st, 0.0, 0.0, rng);
  EXPECT_EQ(o.protected_pos, st.protected_state.position);
  EXPECT_EQ(o.debris_vel[0], st.debris_states[0].velocity);
  EXPECT_EQ(o.fuel_fraction, 1.0);
  EXPECT_EQ(o.time_fraction, 0.0);

  std::vector<double> xs, vs;
  for (int k = 0; k < 10000; ++k) {
    const Observation n = observe(st, 100.0, 0.1, rng);
    xs.push_back(n.protected_pos.x() - st.protected_state.position.x());
    vs.push_back(n.debris_vel[0].z() - st.debris_states[0].velocity.z());
  }
  EXPECT_NEAR(oracle::stddev(xs), 100.0, 5.0);
  EXPECT_NEAR(oracle::stddev(vs), 0.1, 0.005);
}

TEST(Env, ResetState) {
  ConjunctionEnv env(noise_free());
  const auto sc = far_miss();
  const Observation o = env.reset(sc, 1);
  EXPECT_EQ(o.fuel_fraction, 1.0);
  EXPECT_EQ(o.time_fraction, 0.0);
  const StateVector s = elements_to_state(sc.config.protected_elements, sc.config.mu);
  EXPECT_EQ(o.protected_pos, s.position);
  EXPECT_EQ(o.protected_vel, s.velocity);
  EXPECT_EQ(env.state().reference_elements, sc.config.protected_elements);
  EXPECT_EQ(env.state().horizon, 144);
}

TEST(Env, ResetIsDeterministicPerSeed) {
  ConjunctionEnv env;
  const auto sc = far_miss();
  const Observation a = env.reset(sc, 9);
  const Observation b = env.reset(sc, 9);
  const Observation c = env.reset(sc, 10);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
}

TEST(Env, StepBeforeResetAndAfterDoneThrow) {
  ConjunctionEnv env(noise_free());
  EXPECT_THROW(env.step(0), LifecycleError);
  env.reset(far_miss(), 1);
  while (!env.done()) env.step(0);
  EXPECT_THROW(env.step(0), LifecycleError);
}

TEST(Env, CoastingMissEndsAtEndTimeWithConstantElements) {
  ConjunctionEnv env(noise_free());
  const auto sc = far_miss();
  env.reset(sc, 1);
  StepResult r;
  int steps = 0;
  while (!env.done()) {
    r = env.step(0);
    ++steps;
    EXPECT_EQ(r.info.fuel_used, 0.0);
    EXPECT_EQ(r.reward.total, 0.0);
    const auto k = state_to_elements(env.state().protected_state, sc.config.mu);
    EXPECT_LT(std::abs(k.a - sc.config.protected_elements.a) / k.a, 1e-9);
    EXPECT_NEAR(k.e, sc.config.protected_elements.e, 1e-9);
    EXPECT_NEAR(k.i, sc.config.protected_elements.i, 1e-9);
  }
  EXPECT_TRUE(r.info.time_up);
  EXPECT_FALSE(r.info.collision);
  EXPECT_EQ(env.state().time, sc.config.end_time);
  EXPECT_EQ(steps, env.state().horizon);
  EXPECT_EQ(env.state().fuel_remaining, sc.config.fuel_capacity);
}

TEST(Env, DirectHitCollidesAtConstructedStep) {
  const double t_c = 3050.0;
  const auto sc = direct_hit(t_c);
  ConjunctionEnv env(noise_free());
  env.reset(sc, 1);
  StepResult r;
  while (!env.done()) r = env.step(0);
  EXPECT_TRUE(r.info.collision);
  EXPECT_EQ(env.state().step_index, static_cast<int>(std::ceil(t_c / 100.0)));
  EXPECT_LE(r.reward.collision_penalty, -1000.0);
  EXPECT_DOUBLE_EQ(r.reward.total, r.reward.collision_penalty + r.reward.fuel_penalty + r.reward.deviation_penalty);
  const auto dense = oracle::dense_min_distance(sc.config.protected_elements, sc.debris[0].elements, t_c + 100, 1.0);
  EXPECT_LT(dense.distance, env.combined_radius());
}

TEST(Env, FuelLedgerIsExactAndBurnTimingApplies) {
  ConjunctionEnv env(noise_free());
  const auto sc = far_miss();
  env.reset(sc, 1);
  double spent = 0.0;
  const std::vector<int> actions{375, 0, 624, 31, 3, 250, 499};
  for (int a : actions) {
    const auto r = env.step(a);
    spent += r.info.fuel_used;
    EXPECT_DOUBLE_EQ(r.info.fuel_used, decode_action(a).dv.lpNorm<1>());
    EXPECT_LE(r.reward.fuel_penalty, 0.0);
    EXPECT_LE(r.reward.collision_penalty, 0.0);
    EXPECT_LE(r.reward.deviation_penalty, 0.0);
    EXPECT_DOUBLE_EQ(r.reward.total, r.reward.collision_penalty + r.reward.fuel_penalty + r.reward.deviation_penalty);
  }
  EXPECT_DOUBLE_EQ(sc.config.fuel_capacity - env.state().fuel_remaining, spent);
}

TEST(Env, BurnSlotSetsImpulseInstant) {
  // A +0.1 m/s x burn at slot k changes the orbit at t = k * dt / 5; the
  // post-step state must match propagating through an impulse at that time.
  const auto sc = far_miss();
  const GravParams grav = sc.config.mu;
  for (int slot = 0; slot < 5; ++slot) {
    ConjunctionEnv env(noise_free());
    env.reset(sc, 1);
    env.step(encode_action({{3, 0, 0}, slot}));
    const double t_burn = slot * 20.0;
    StateVector s = propagate(sc.config.protected_elements, t_burn, grav);
    s = apply_impulse(s, Vec3(0.1, 0, 0));
    const StateVector expect = propagate(state_to_elements(s, grav), 100.0 - t_burn, grav);
    EXPECT_LT((env.state().protected_state.position - expect.position).norm(), 1e-3) << slot;
  }
}

TEST(Env, FuelExhaustionEndsEpisode) {
  ScenarioConfig cfg = far_miss().config;
  cfg.fuel_capacity = 0.25;
  auto sc = far_miss();
  sc.config = cfg;
  ConjunctionEnv env(noise_free());
  env.reset(sc, 1);
  const auto r1 = env.step(encode_action({{3, 3, 0}, 0}));  // 0.2 units
  EXPECT_FALSE(r1.done);
  const auto r2 = env.step(encode_action({{3, 3, 0}, 0}));  // only 0.05 left
  EXPECT_TRUE(r2.done);
  EXPECT_TRUE(r2.info.fuel_exhausted);
  EXPECT_DOUBLE_EQ(r2.info.fuel_used, 0.05);
  EXPECT_EQ(env.state().fuel_remaining, 0.0);
}

TEST(Env, EpisodeDeterminism) {
  ConjunctionScenario sc;
  ScenarioConfig cfg;
  cfg.rng_seed = 4;
  cfg.n_debris = 2;
  sc = generate_scenario(cfg);
  auto run = [&] {
    ConjunctionEnv env;
    std::vector<double> out;
    const Observation o = env.reset(sc, 77);
    out.push_back(o.protected_pos.x());
    for (int k = 0; k < 30 && !env.done(); ++k) {
      const auto r = env.step((k * 37) % 625);
      out.push_back(r.reward.total);
      out.push_back(r.observation.debris_pos[1].y());
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Trace, HeaderAndRows) {
  ConjunctionEnv env(noise_free());
  const auto sc = far_miss();
  env.reset(sc, 1);
  std::vector<TraceRow> rows;
  for (int k = 0; k < 3; ++k) {
    const auto r = env.step(k);
    rows.push_back(make_trace_row(env, k, r));
  }
  std::ostringstream out;
  write_trace(out, rows);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind(trace_header(1), 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
