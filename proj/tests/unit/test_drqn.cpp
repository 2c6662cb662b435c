#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cavoid/drqn.hpp"
#include "cavoid/errors.hpp"
#include "cavoid/evaluation.hpp"
#include "cavoid/replay.hpp"

using namespace cavoid;
using Eigen::VectorXd;

namespace {

// Episode of `n` transitions; the action field carries `tag` and the
// reward field the position inside the episode.
Episode tagged_episode(int n, int tag, int dim = 3) {
  Episode ep;
  for (int k = 0; k < n; ++k) {
    ep.push_back({VectorXd::Constant(dim, k), tag, static_cast<double>(k), VectorXd::Constant(dim, k + 1), k == n - 1});
  }
  return ep;
}

QNetworkParams constant_q(NetworkShape shape, double value) {
  QNetworkParams p(shape);
  p.head_bias().setConstant(value);
  return p;
}

ConjunctionScenario direct_hit(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.end_time = 2 * 3600.0;
  cfg.sigma_pos = 0.0;
  cfg.sigma_vr = 0.0;
  cfg.rng_seed = seed;
  return generate_scenario(cfg);
}

ConjunctionScenario far_miss() {
  ScenarioConfig cfg;
  cfg.end_time = 3600.0;
  auto k = cfg.protected_elements;
  k.M = wrap_two_pi(k.M + 2.0);
  k.i += 0.3;
  return {cfg, {DebrisRecord{k, 0.0, elements_to_state(k, cfg.mu)}}};
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.hidden_size = 6;
  cfg.n_episodes = 3;
  cfg.buffer_capacity = 200;
  cfg.seq_len = 4;
  cfg.rng_seed = 42;
  return cfg;
}

}  // namespace

TEST(SelectAction, GreedyAndTies) {
  Rng rng(1);
  VectorXd q = VectorXd::Zero(625);
  q[7] = 2.0;
  EXPECT_EQ(select_action(q, 0.0, rng), 7);
  q.setZero();
  q[3] = 1.0;
  q[9] = 1.0;
  EXPECT_EQ(select_action(q, 0.0, rng), 3);
  EXPECT_EQ(select_action(VectorXd::Zero(625), 0.0, rng), 0);
  EXPECT_THROW(select_action(q, 1.5, rng), DomainError);
}

TEST(SelectAction, ScalingInvariance) {
  Rng rng(4);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd q(625);
    for (auto& v : q) v = n01(rng);
    EXPECT_EQ(select_action(q, 0.0, rng), select_action(3.7 * q, 0.0, rng));
  }
}

TEST(SelectAction, UniformWhenFullyExploring) {
  Rng rng(2024);
  std::vector<int> counts(625, 0);
  const int n = 100000;
  for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(select_action(VectorXd::Zero(625), 1.0, rng))];
  const double p = 1.0 / 625, mean = n * p, sd = std::sqrt(n * p * (1 - p));
  // A 3-sigma band holds for 99.73% of actions; over 625 of them a couple
  // fall outside by chance, so allow 1% outside and none beyond 5 sigma.
  int outside = 0;
  for (int a = 0; a < 625; ++a) {
    const double dev = std::abs(counts[static_cast<std::size_t>(a)] - mean);
    outside += dev > 3 * sd;
    EXPECT_LE(dev, 5 * sd) << a;
  }
  EXPECT_LE(outside, 6);
}

TEST(SoftUpdate, Identities) {
  Rng rng(3);
  const auto online = QNetworkParams::initialize({4, 3, 5}, rng);
  const auto target = QNetworkParams::initialize({4, 3, 5}, rng);
  EXPECT_EQ(soft_update(online, target, 1.0), online);
  EXPECT_EQ(soft_update(online, target, 0.0), target);
  QNetworkParams ones(online.shape()), zeros(online.shape());
  ones.flat().setOnes();
  const auto mixed = soft_update(ones, zeros, 0.1);
  for (double v : mixed.flat()) EXPECT_EQ(v, 0.1);
  for (double tau : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const auto r = soft_update(online, target, tau);
    for (Eigen::Index k = 0; k < r.flat().size(); ++k) {
      EXPECT_NEAR(r.flat()[k], tau * online.flat()[k] + (1 - tau) * target.flat()[k], 1e-15);
    }
  }
  EXPECT_THROW(soft_update(online, QNetworkParams({4, 2, 5}), 0.5), ConfigError);
}

TEST(TdTargets, Examples) {
  const NetworkShape shape{3, 2, 5};
  SequenceSample terminal;
  terminal.transitions = {{VectorXd::Zero(3), 0, -5.0, VectorXd::Zero(3), true}};
  SequenceSample open;
  open.transitions = {{VectorXd::Zero(3), 0, 0.0, VectorXd::Ones(3), false}};
  const auto y = td_targets({terminal, open}, constant_q(shape, 10.0), 0.99);
  EXPECT_EQ(y[0], -5.0);
  EXPECT_DOUBLE_EQ(y[1], 9.9);
  Rng rng(1);
  EXPECT_EQ(td_targets({terminal}, QNetworkParams::initialize(shape, rng), 0.99)[0], -5.0);
  EXPECT_THROW(td_targets({}, constant_q(shape, 1.0), 0.99), DomainError);
}

TEST(TdTargets, BatchMatchesOneAtATime) {
  Rng rng(6);
  const auto target = QNetworkParams::initialize({3, 5, 7}, rng);
  ReplayBuffer buf(1000);
  std::normal_distribution<double> n01;
  for (int e = 0; e < 4; ++e) {
    Episode ep;
    for (int k = 0; k < 9 + e; ++k) {
      VectorXd x(3), nx(3);
      for (auto& v : x) v = n01(rng);
      for (auto& v : nx) v = n01(rng);
      ep.push_back({x, k % 7, n01(rng), nx, k == 8 + e});
    }
    buf.store_episode(ep);
  }
  const auto batch = buf.sample_sequences(16, 5, rng);
  const VectorXd y = td_targets(batch, target, 0.99);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    EXPECT_NEAR(y[static_cast<Eigen::Index>(b)], td_targets({batch[b]}, target, 0.99)[0], 1e-12);
  }
}

TEST(Replay, WholeEpisodeEviction) {
  ReplayBuffer buf(10);
  buf.store_episode(tagged_episode(6, 1));
  EXPECT_EQ(buf.size(), 6u);
  buf.store_episode(tagged_episode(6, 2));
  EXPECT_EQ(buf.size(), 6u);
  EXPECT_EQ(buf.episode_count(), 1u);
  EXPECT_EQ(buf.episodes().front().front().action, 2);
}

TEST(Replay, NeverExceedsCapacity) {
  ReplayBuffer buf(25);
  Rng rng(9);
  for (int e = 0; e < 40; ++e) {
    buf.store_episode(tagged_episode(1 + static_cast<int>(rng() % 30), e));
    EXPECT_LE(buf.size(), buf.capacity());
  }
}

TEST(Replay, EmptyBufferNotReady) {
  ReplayBuffer buf(10);
  Rng rng(1);
  EXPECT_THROW(buf.sample_sequences(4, 3, rng), BufferNotReadyError);
}

TEST(Replay, WindowsStayInsideOneEpisode) {
  ReplayBuffer buf(100);
  buf.store_episode(tagged_episode(5, 0));
  buf.store_episode(tagged_episode(12, 1));
  Rng rng(3);
  const auto batch = buf.sample_sequences(4, 6, rng);
  ASSERT_EQ(batch.size(), 4u);
  for (int rep = 0; rep < 200; ++rep) {
    for (const auto& s : buf.sample_sequences(4, 6, rng)) {
      ASSERT_FALSE(s.transitions.empty());
      EXPECT_LE(s.transitions.size(), 6u);
      const int tag = s.transitions.front().action;
      for (std::size_t k = 0; k < s.transitions.size(); ++k) {
        EXPECT_EQ(s.transitions[k].action, tag);
        if (k > 0) EXPECT_EQ(s.transitions[k].reward, s.transitions[k - 1].reward + 1);
      }
      EXPECT_EQ(s.transitions.back().reward, static_cast<double>(s.end));
      // Short windows only occur at the episode start.
      if (s.transitions.size() < 6u) EXPECT_EQ(s.transitions.front().reward, 0.0);
    }
  }
}

TEST(Replay, EpisodeSelectionIsUniform) {
  ReplayBuffer buf(100);
  buf.store_episode(tagged_episode(10, 0));
  buf.store_episode(tagged_episode(10, 1));
  Rng rng(17);
  int first = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) first += buf.sample_sequences(1, 4, rng)[0].transitions[0].action == 0;
  EXPECT_NEAR(static_cast<double>(first) / n, 0.5, 0.02);
}

TEST(TrainStep, ExactTargetsLeaveOnlineUnchanged) {
  Rng rng(5);
  auto online = QNetworkParams::initialize({3, 4, 6}, rng);
  auto target = online;
  auto opt = OptimizerState::zeros_like(online);
  Episode ep = tagged_episode(5, 2);
  for (auto& e : ep) e.terminal = true;
  std::vector<SequenceSample> batch;
  std::vector<std::vector<VectorXd>> histories;
  for (std::size_t end = 0; end < ep.size(); ++end) {
    SequenceSample s;
    s.transitions.assign(ep.begin(), ep.begin() + static_cast<std::ptrdiff_t>(end + 1));
    histories.emplace_back();
    for (const auto& t : s.transitions) histories.back().push_back(t.observation);
    batch.push_back(s);
  }
  const Eigen::MatrixXd q = batch_q_forward(SequenceBatch::pack(histories), online);
  for (std::size_t b = 0; b < batch.size(); ++b) batch[b].transitions.back().reward = q(2, static_cast<Eigen::Index>(b));
  const auto before = online;
  TrainConfig cfg;
  EXPECT_EQ(train_step(batch, online, target, opt, cfg), 0.0);
  EXPECT_EQ(online, before);
}

TEST(TrainStep, RepeatedTransitionLossDecreases) {
  Rng rng(5);
  auto online = QNetworkParams::initialize({3, 4, 6}, rng);
  auto target = online;
  auto opt = OptimizerState::zeros_like(online);
  SequenceSample s;
  s.transitions = {{VectorXd::Constant(3, 0.5), 1, 3.0, VectorXd::Zero(3), true}};
  TrainConfig cfg;
  double prev = train_step({s}, online, target, opt, cfg);
  const double first = prev;
  for (int k = 0; k < 100; ++k) {
    const double loss = train_step({s}, online, target, opt, cfg);
    EXPECT_LT(loss, prev) << k;
    prev = loss;
  }
  EXPECT_LT(prev, first);
}

TEST(TrainStep, Deterministic) {
  Rng rng(7);
  const auto init = QNetworkParams::initialize({3, 4, 6}, rng);
  ReplayBuffer buf(100);
  Episode ep = tagged_episode(8, 3);
  for (auto& e : ep) e.terminal = false;
  buf.store_episode(ep);
  Rng srng(1);
  const auto batch = buf.sample_sequences(5, 3, srng);
  auto run = [&] {
    auto online = init, target = init;
    auto opt = OptimizerState::zeros_like(init);
    const double loss = train_step(batch, online, target, opt, TrainConfig{});
    return std::make_pair(loss, online);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainStep, NonFiniteSurfacesAsDivergence) {
  Rng rng(7);
  auto online = QNetworkParams::initialize({3, 4, 6}, rng);
  auto target = online;
  auto opt = OptimizerState::zeros_like(online);
  SequenceSample s;
  s.transitions = {{VectorXd::Zero(3), 0, std::numeric_limits<double>::infinity(), VectorXd::Zero(3), true}};
  EXPECT_THROW(train_step({s}, online, target, opt, TrainConfig{}), TrainingDivergenceError);
}

TEST(Epsilon, LinearOverHalfTheEpisodes) {
  TrainConfig cfg;
  cfg.n_episodes = 200;
  EXPECT_EQ(epsilon_at(cfg, 0), 1.0);
  EXPECT_NEAR(epsilon_at(cfg, 50), 0.525, 1e-12);
  EXPECT_EQ(epsilon_at(cfg, 100), 0.05);
  EXPECT_EQ(epsilon_at(cfg, 199), 0.05);
}

TEST(TrainConfigValidation, RejectsBadValues) {
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](TrainConfig& c) { c.tau = 1.5; }).validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig& c) { c.gamma = -0.1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig& c) { c.batch_size = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig& c) { c.reward_scale = 0.0; }).validate(), ConfigError);
  EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(Encoding, ScalesAndPads) {
  Observation o;
  o.protected_pos = Vec3(7e6, 0, -1e6);
  o.protected_vel = Vec3(0, 7500, 0);
  o.debris_pos = {Vec3(1e7, 0, 0)};
  o.debris_vel = {Vec3(0, 0, -1e4)};
  o.fuel_fraction = 0.5;
  o.time_fraction = 0.25;
  const VectorXd x = encode_observation(o, 3);
  ASSERT_EQ(x.size(), 26);
  EXPECT_EQ(x[0], 0.7);
  EXPECT_EQ(x[4], 0.75);
  EXPECT_EQ(x[6], 1.0);
  EXPECT_EQ(x[11], -1.0);
  EXPECT_EQ(x.segment(12, 12), VectorXd::Zero(12));
  EXPECT_EQ(x[24], 0.5);
  EXPECT_EQ(x[25], 0.25);
  o.debris_pos.resize(4);
  o.debris_vel.resize(4);
  EXPECT_THROW(encode_observation(o, 3), ConfigError);
}

TEST(Train, ZeroEpisodesReturnsInitialization) {
  TrainConfig cfg = tiny_config();
  cfg.n_episodes = 0;
  const auto r = train(cfg, {}, {far_miss()});
  EXPECT_TRUE(r.metrics.episodes.empty());
  Rng init(derive_seed(cfg.rng_seed, {0}));
  EXPECT_EQ(r.params, QNetworkParams::initialize(network_shape(cfg, {}), init));
}

TEST(Train, DeterministicAndOneRowPerEpisode) {
  const TrainConfig cfg = tiny_config();
  const auto a = train(cfg, {}, {far_miss()});
  const auto b = train(cfg, {}, {far_miss()});
  ASSERT_EQ(a.metrics.episodes.size(), 3u);
  EXPECT_EQ(a.metrics.episodes, b.metrics.episodes);
  EXPECT_EQ(a.params, b.params);
  EXPECT_TRUE(std::isnan(a.metrics.episodes[0].mean_loss));
  EXPECT_GT(a.metrics.episodes[2].updates, 0);
  for (const auto& m : a.metrics.episodes) EXPECT_EQ(m.steps, 36);
}

TEST(Train, RejectsMissingScenarios) {
  TrainConfig cfg = tiny_config();
  EXPECT_THROW(train(cfg, {}, {}), ConfigError);
  cfg.n_environments = 3;
  EXPECT_THROW(train(cfg, {}, {far_miss()}), ConfigError);
}

TEST(Baseline, FarMissCoastsAndHeadOnBurns) {
  EnvConfig env_cfg;
  env_cfg.sigma_obs_pos = 0.0;
  env_cfg.sigma_obs_vel = 0.0;
  {
    ConjunctionEnv env(env_cfg);
    const Observation o = env.reset(far_miss(), 1);
    EXPECT_EQ(baseline_policy(o, BaselineContext::from_env(env)), 0);
  }
  {
    ConjunctionEnv env(env_cfg);
    const Observation o = env.reset(direct_hit(3), 1);
    const auto ctx = BaselineContext::from_env(env);
    EXPECT_GT(observed_collision_probability(o, ctx), 1e-4);
    EXPECT_EQ(baseline_policy(o, ctx), baseline_burn_action());
  }
  const Burn burn = decode_action(baseline_burn_action());
  EXPECT_EQ(burn.dv, Vec3(0.1, 0, 0));
  EXPECT_EQ(burn.time_slot, 0);
}

TEST(Baseline, ThresholdIsStrict) {
  ScenarioConfig cfg;
  cfg.sigma_pos = 400.0;
  cfg.rng_seed = 5;
  const auto sc = generate_scenario(cfg);
  EnvConfig env_cfg;
  env_cfg.sigma_obs_pos = 0.0;
  env_cfg.sigma_obs_vel = 0.0;
  ConjunctionEnv env(env_cfg);
  const Observation o = env.reset(sc, 1);
  auto ctx = BaselineContext::from_env(env);
  const double p = observed_collision_probability(o, ctx);
  ASSERT_GT(p, 0.0);
  ctx.env.thresholds.probability = p;
  EXPECT_EQ(baseline_policy(o, ctx), 0);
  ctx.env.thresholds.probability = std::nextafter(p, 0.0);
  EXPECT_EQ(baseline_policy(o, ctx), baseline_burn_action());
}

TEST(Evaluate, ZeroPolicyOnSafeScenario) {
  EnvConfig env_cfg;
  ConstantPolicy coast(0);
  const auto m = evaluate(coast, {far_miss()}, 3, 11, env_cfg);
  EXPECT_EQ(m.mean_reward, 0.0);
  EXPECT_EQ(m.mean_fuel_used, 0.0);
  EXPECT_EQ(m.collision_rate, 0.0);
  EXPECT_EQ(m.rollouts.size(), 3u);
}

TEST(Evaluate, SameSeedsSameMetrics) {
  EnvConfig env_cfg;
  Rng rng(3);
  GreedyQPolicy a(QNetworkParams::initialize({26, 8, 625}, rng), 3);
  GreedyQPolicy b = a;
  const auto ma = evaluate(a, {direct_hit(1)}, 2, 5, env_cfg);
  const auto mb = evaluate(b, {direct_hit(1)}, 2, 5, env_cfg);
  EXPECT_EQ(ma.mean_reward, mb.mean_reward);
  EXPECT_EQ(ma.collision_rate, mb.collision_rate);
  EXPECT_EQ(ma.mean_fuel_used, mb.mean_fuel_used);
}

TEST(Evaluate, BaselineBeatsCoastingOnDirectHits) {
  std::vector<ConjunctionScenario> hits;
  for (std::uint64_t s = 0; s < 20; ++s) hits.push_back(direct_hit(s));
  EnvConfig env_cfg;
  ConstantPolicy coast(0);
  ThresholdBaselinePolicy baseline;
  const auto mc = evaluate(coast, hits, 1, 9, env_cfg);
  const auto mb = evaluate(baseline, hits, 1, 9, env_cfg);
  EXPECT_GT(mc.collision_rate, 0.5);
  EXPECT_LT(mb.collision_rate, mc.collision_rate);
}
