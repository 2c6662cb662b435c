#include "cavoid/evaluation.hpp"

#include <cmath>

#include "cavoid/drqn.hpp"
#include "cavoid/errors.hpp"

namespace cavoid {

ConstantPolicy::ConstantPolicy(int action) : action_(action) { (void)action_digits(action); }

GreedyQPolicy::GreedyQPolicy(QNetworkParams params, int max_debris)
    : params_(std::move(params)), max_debris_(max_debris), state_(RecurrentState::zeros(params_.hidden_size())) {
  if (params_.shape().obs_dim != observation_dim(max_debris)) {
    throw ConfigError("network input size does not match max_debris");
  }
  if (params_.shape().n_actions != kActionCount) throw ConfigError("network must have one output per action");
}

void GreedyQPolicy::begin_episode(const ConjunctionEnv&) { state_ = RecurrentState::zeros(params_.hidden_size()); }

int GreedyQPolicy::act(const Observation& obs) {
  state_ = recurrent_step(encode_observation(obs, max_debris_), state_, params_);
  Rng unused(0);
  return select_action(q_head(state_.hidden, params_), 0.0, unused);
}

BaselineContext BaselineContext::from_env(const ConjunctionEnv& env) {
  BaselineContext ctx;
  ctx.env = env.config();
  const ScenarioConfig& sc = env.scenario().config;
  ctx.span = sc.end_time - sc.start_time;
  ctx.combined_radius = env.combined_radius();
  ctx.sigma_c = env.sigma_c();
  ctx.grav = sc.mu;
  return ctx;
}

int baseline_burn_action() {
  // 0.1 is kThrustValues[3].
  return encode_action({{3, 0, 0}, 0});
}

double observed_collision_probability(const Observation& obs, const BaselineContext& ctx) {
  const TwoBodyPropagator prop(ctx.grav);
  const double remaining = std::max(0.0, (1.0 - obs.time_fraction) * ctx.span);
  OrbitAtEpoch prot;
  try {
    prot = {state_to_elements({obs.protected_pos, obs.protected_vel, 0.0}, ctx.grav), 0.0};
  } catch (const OrbitError&) {
    return 0.0;
  }
  double p = 0.0;
  for (std::size_t d = 0; d < obs.debris_pos.size(); ++d) {
    OrbitAtEpoch deb;
    try {
      deb = {state_to_elements({obs.debris_pos[d], obs.debris_vel[d], 0.0}, ctx.grav), 0.0};
    } catch (const OrbitError&) {
      continue;
    }
    const ClosestApproach tca = find_tca(prop, prot, deb, 0.0, remaining, ctx.env.tca_coarse_dt);
    p = std::max(p, collision_probability(tca.distance, ctx.combined_radius, ctx.sigma_c));
  }
  return p;
}

int baseline_policy(const Observation& obs, const BaselineContext& ctx) {
  return observed_collision_probability(obs, ctx) > ctx.env.thresholds.probability ? baseline_burn_action() : 0;
}

RolloutResult rollout(Policy& policy, ConjunctionEnv& env, const ConjunctionScenario& scenario,
                      std::uint64_t obs_seed, std::vector<TraceRow>* trace) {
  Observation obs = env.reset(scenario, obs_seed);
  policy.begin_episode(env);
  RolloutResult r;
  bool done = false;
  while (!done) {
    const int action = policy.act(obs);
    const StepResult step = env.step(action);
    if (trace) trace->push_back(make_trace_row(env, action, step));
    r.cumulative_reward += step.reward.total;
    r.fuel_used += step.info.fuel_used;
    r.collision = r.collision || step.info.collision;
    r.steps += 1;
    obs = step.observation;
    done = step.done;
  }
  return r;
}

EvalMetrics evaluate(Policy& policy, const std::vector<ConjunctionScenario>& scenarios, int n_seeds,
                     std::uint64_t seed, const EnvConfig& env_cfg) {
  if (scenarios.empty()) throw DomainError("evaluate needs at least one scenario");
  if (n_seeds < 1) throw DomainError("evaluate needs at least one seed");
  ConjunctionEnv env(env_cfg);
  EvalMetrics m;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (int k = 0; k < n_seeds; ++k) {
      m.rollouts.push_back(rollout(policy, env, scenarios[s], derive_seed(seed, {s, static_cast<std::uint64_t>(k)})));
    }
  }
  const double n = static_cast<double>(m.rollouts.size());
  for (const auto& r : m.rollouts) {
    m.mean_reward += r.cumulative_reward;
    m.collision_rate += r.collision ? 1.0 : 0.0;
    m.mean_fuel_used += r.fuel_used;
  }
  m.mean_reward /= n;
  m.collision_rate /= n;
  m.mean_fuel_used /= n;
  double var = 0.0;
  for (const auto& r : m.rollouts) var += (r.cumulative_reward - m.mean_reward) * (r.cumulative_reward - m.mean_reward);
  m.std_reward = std::sqrt(var / n);
  return m;
}

}  // namespace cavoid
