#include <benchmark/benchmark.h>

#include "cavoid/drqn.hpp"
#include "cavoid/env.hpp"
#include "cavoid/orbital.hpp"

using namespace cavoid;

static void BM_SolveKepler(benchmark::State& state) {
  const double e = static_cast<double>(state.range(0)) / 100.0;
  double M = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_kepler(M, e));
    M += 0.37;
    if (M > kTwoPi) M -= kTwoPi;
  }
}
BENCHMARK(BM_SolveKepler)->Arg(0)->Arg(10)->Arg(50)->Arg(90);

static void BM_Propagate(benchmark::State& state) {
  const auto kep = KeplerianElements::make(7.0e6, 0.01, 0.9, 1.0, 2.0, 0.5);
  const GravParams grav;
  double dt = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate(kep, dt, grav));
    dt += 17.0;
  }
}
BENCHMARK(BM_Propagate);

static void BM_FindTca(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.rng_seed = 7;
  const auto scenario = generate_scenario(cfg);
  TwoBodyPropagator prop(cfg.mu);
  const OrbitAtEpoch a{cfg.protected_elements, 0.0};
  const OrbitAtEpoch b{scenario.debris[0].elements, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(find_tca(prop, a, b, 0.0, 14400.0, 20.0));
}
BENCHMARK(BM_FindTca)->Unit(benchmark::kMicrosecond);

static void BM_EnvStep(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.rng_seed = 3;
  const auto scenario = generate_scenario(cfg);
  ConjunctionEnv env{EnvConfig{}};
  env.reset(scenario, 1);
  for (auto _ : state) {
    if (env.done()) env.reset(scenario, 1);
    benchmark::DoNotOptimize(env.step(0));
  }
}
BENCHMARK(BM_EnvStep)->Unit(benchmark::kMicrosecond);

static void BM_QForward(benchmark::State& state) {
  Rng rng(1);
  const int hidden = static_cast<int>(state.range(0));
  const NetworkShape shape{observation_dim(3), hidden, kActionCount};
  const auto params = QNetworkParams::initialize(shape, rng);
  std::vector<Eigen::VectorXd> seq(16, Eigen::VectorXd::Constant(shape.obs_dim, 0.1));
  for (auto _ : state) benchmark::DoNotOptimize(q_forward(seq, params));
}
BENCHMARK(BM_QForward)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_TrainStep(benchmark::State& state) {
  Rng rng(2);
  TrainConfig cfg;
  cfg.batch_size = static_cast<int>(state.range(0));
  const NetworkShape shape{observation_dim(3), cfg.hidden_size, kActionCount};
  auto online = QNetworkParams::initialize(shape, rng);
  auto target = online;
  auto opt = OptimizerState::zeros_like(online);
  ReplayBuffer buffer(1000);
  std::normal_distribution<double> n01;
  for (int ep = 0; ep < 4; ++ep) {
    Episode episode;
    for (int t = 0; t < 150; ++t) {
      Experience x;
      x.observation = Eigen::VectorXd::NullaryExpr(shape.obs_dim, [&] { return n01(rng); });
      x.next_observation = Eigen::VectorXd::NullaryExpr(shape.obs_dim, [&] { return n01(rng); });
      x.action = t % kActionCount;
      x.reward = -n01(rng) * n01(rng);
      x.terminal = t == 149;
      episode.push_back(x);
    }
    buffer.store_episode(std::move(episode));
  }
  for (auto _ : state) {
    const auto batch = buffer.sample_sequences(cfg.batch_size, cfg.seq_len, rng);
    benchmark::DoNotOptimize(train_step(batch, online, target, opt, cfg));
  }
}
BENCHMARK(BM_TrainStep)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
