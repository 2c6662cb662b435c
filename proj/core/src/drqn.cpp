#include "cavoid/drqn.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "cavoid/errors.hpp"

namespace cavoid {

using Eigen::VectorXd;

int observation_dim(int max_debris) { return 6 + 6 * max_debris + 2; }

VectorXd encode_observation(const Observation& obs, int max_debris) {
  const int n = static_cast<int>(obs.debris_pos.size());
  if (n > max_debris) {
    throw ConfigError("observation has " + std::to_string(n) + " debris but the network takes " +
                      std::to_string(max_debris));
  }
  VectorXd x = VectorXd::Zero(observation_dim(max_debris));
  x.segment<3>(0) = obs.protected_pos / kPositionScale;
  x.segment<3>(3) = obs.protected_vel / kVelocityScale;
  for (int d = 0; d < n; ++d) {
    x.segment<3>(6 + 6 * d) = obs.debris_pos[static_cast<std::size_t>(d)] / kPositionScale;
    x.segment<3>(9 + 6 * d) = obs.debris_vel[static_cast<std::size_t>(d)] / kVelocityScale;
  }
  x[6 + 6 * max_debris] = obs.fuel_fraction;
  x[7 + 6 * max_debris] = obs.time_fraction;
  return x;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (n_episodes < 0) throw ConfigError("n_episodes must be >= 0");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (n_environments < 1) throw ConfigError("n_environments must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("epsilon bounds must lie in [0, 1]");
  }
  if (epsilon_decay_episodes < 0) throw ConfigError("epsilon_decay_episodes must be >= 0");
  if (seq_len < 1) throw ConfigError("seq_len must be >= 1");
  if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be positive");
  if (!(reward_scale > 0.0) || !std::isfinite(reward_scale)) throw ConfigError("reward_scale must be positive");
}

double epsilon_at(const TrainConfig& cfg, int episode) {
  const int decay = cfg.epsilon_decay_episodes > 0 ? cfg.epsilon_decay_episodes : std::max(1, cfg.n_episodes / 2);
  const double frac = static_cast<double>(episode) / decay;
  if (frac >= 1.0) return cfg.epsilon_end;
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

int select_action(const VectorXd& q_values, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
  if (q_values.size() == 0) throw DomainError("no Q-values to choose from");
  if (epsilon > 0.0) {
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
      return std::uniform_int_distribution<int>(0, static_cast<int>(q_values.size()) - 1)(rng);
    }
  }
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < q_values.size(); ++k) {
    if (q_values[k] > q_values[best]) best = k;
  }
  return static_cast<int>(best);
}

QNetworkParams soft_update(const QNetworkParams& online, const QNetworkParams& target, double tau) {
  QNetworkParams out = target;
  soft_update_inplace(online, out, tau);
  return out;
}

void soft_update_inplace(const QNetworkParams& online, QNetworkParams& target, double tau) {
  require_same_shape(online, target, "soft_update");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau must lie in [0, 1]");
  if (tau == 1.0) {
    target.flat() = online.flat();
  } else if (tau != 0.0) {
    target.flat() = tau * online.flat() + (1.0 - tau) * target.flat();
  }
}

VectorXd td_targets(const std::vector<SequenceSample>& batch, const QNetworkParams& target, double gamma) {
  if (batch.empty()) throw DomainError("td_targets needs a non-empty batch");
  VectorXd y(static_cast<Eigen::Index>(batch.size()));
  std::vector<std::vector<VectorXd>> histories;
  std::vector<Eigen::Index> slots;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& tr = batch[b].transitions;
    if (tr.empty()) throw DomainError("empty sequence sample");
    const Experience& last = tr.back();
    y[static_cast<Eigen::Index>(b)] = last.reward;
    if (last.terminal) continue;
    std::vector<VectorXd> h;
    h.reserve(tr.size() + 1);
    for (const auto& e : tr) h.push_back(e.observation);
    h.push_back(last.next_observation);
    histories.push_back(std::move(h));
    slots.push_back(static_cast<Eigen::Index>(b));
  }
  if (!histories.empty()) {
    const Eigen::MatrixXd q = batch_q_forward(SequenceBatch::pack(histories), target);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      y[slots[k]] += gamma * q.col(static_cast<Eigen::Index>(k)).maxCoeff();
    }
  }
  return y;
}

double train_step(const std::vector<SequenceSample>& batch, QNetworkParams& online, QNetworkParams& target,
                  OptimizerState& opt, const TrainConfig& cfg) {
  const VectorXd y = td_targets(batch, target, cfg.gamma);

  std::vector<std::vector<VectorXd>> histories;
  std::vector<int> actions;
  histories.reserve(batch.size());
  for (const auto& s : batch) {
    std::vector<VectorXd> h;
    h.reserve(s.transitions.size());
    for (const auto& e : s.transitions) h.push_back(e.observation);
    histories.push_back(std::move(h));
    actions.push_back(s.transitions.back().action);
  }
  const LossAndGrad lg = batch_huber_backward(SequenceBatch::pack(histories), actions, y, online, cfg.huber_delta);
  if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) {
    throw TrainingDivergenceError("non-finite loss or gradient in train_step");
  }
  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;
  adam_step(online, lg.grad, opt, adam);
  if (!online.all_finite()) throw TrainingDivergenceError("parameters became non-finite");
  soft_update_inplace(online, target, cfg.tau);
  return lg.loss;
}

bool EpisodeMetrics::operator==(const EpisodeMetrics& o) const {
  auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  return episode == o.episode && same(cumulative_reward, o.cumulative_reward) && same(mean_loss, o.mean_loss) &&
         same(epsilon, o.epsilon) && steps == o.steps && updates == o.updates && collision == o.collision &&
         same(fuel_used, o.fuel_used);
}

NetworkShape network_shape(const TrainConfig& cfg, const EnvConfig& env_cfg) {
  return {observation_dim(env_cfg.max_debris), cfg.hidden_size, kActionCount};
}

TrainResult train(const TrainConfig& cfg, const EnvConfig& env_cfg, const std::vector<ConjunctionScenario>& scenarios,
                  const EpisodeCallback& on_episode) {
  cfg.validate();
  env_cfg.validate();
  if (scenarios.empty()) throw ConfigError("train needs at least one scenario");
  if (cfg.n_environments > 1 && scenarios.size() < static_cast<std::size_t>(cfg.n_environments)) {
    throw ConfigError("n_environments exceeds the number of supplied scenarios");
  }

  const auto t_start = std::chrono::steady_clock::now();
  const std::uint64_t master = cfg.rng_seed;
  Rng init_rng(derive_seed(master, {0}));
  Rng explore_rng(derive_seed(master, {1}));
  Rng sample_rng(derive_seed(master, {2}));
  Rng scenario_rng(derive_seed(master, {3}));

  TrainResult result;
  result.params = QNetworkParams::initialize(network_shape(cfg, env_cfg), init_rng);
  QNetworkParams& online = result.params;
  QNetworkParams target = online;
  OptimizerState opt = OptimizerState::zeros_like(online);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  ConjunctionEnv env(env_cfg);
  const int hidden = cfg.hidden_size;

  for (int ep = 0; ep < cfg.n_episodes; ++ep) {
    std::size_t which = 0;
    if (cfg.n_environments > 1) {
      which = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(cfg.n_environments) - 1)(scenario_rng);
    }
    const double eps = epsilon_at(cfg, ep);
    Observation obs = env.reset(scenarios[which], derive_seed(master, {4, static_cast<std::uint64_t>(ep)}));
    VectorXd x = encode_observation(obs, env_cfg.max_debris);
    RecurrentState rs = RecurrentState::zeros(hidden);

    EpisodeMetrics m;
    m.episode = ep;
    m.epsilon = eps;
    double loss_sum = 0.0;
    Episode episode;
    bool done = false;
    while (!done) {
      rs = recurrent_step(x, rs, online);
      const int action = select_action(q_head(rs.hidden, online), eps, explore_rng);
      const StepResult step = env.step(action);
      VectorXd x_next = encode_observation(step.observation, env_cfg.max_debris);
      episode.push_back({x, action, cfg.reward_scale * step.reward.total, x_next, step.done});

      m.cumulative_reward += step.reward.total;
      m.fuel_used += step.info.fuel_used;
      m.collision = m.collision || step.info.collision;
      m.steps += 1;
      done = step.done;

      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = buffer.sample_sequences(cfg.batch_size, cfg.seq_len, sample_rng);
        loss_sum += train_step(batch, online, target, opt, cfg);
        m.updates += 1;
      }
      x = std::move(x_next);
    }
    buffer.store_episode(std::move(episode));
    m.mean_loss = m.updates > 0 ? loss_sum / m.updates : std::numeric_limits<double>::quiet_NaN();
    result.metrics.episodes.push_back(m);
    if (on_episode) on_episode(m);
  }

  result.metrics.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace cavoid
