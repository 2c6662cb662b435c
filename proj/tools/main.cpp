// cavoid: scenario generation, training, evaluation, grid search and
// metrics export from the command line.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "cavoid/checkpoint.hpp"
#include "cavoid/config_io.hpp"
#include "cavoid/errors.hpp"
#include "cavoid/evaluation.hpp"
#include "cavoid/harness.hpp"
#include "cavoid/metrics_io.hpp"

namespace fs = std::filesystem;
using namespace cavoid;

namespace {

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scenarios;
  std::optional<int> episodes;
};

ExperimentConfig load_config(const CommonOpts& o) {
  return o.config.empty() ? ExperimentConfig{} : load_experiment(o.config);
}

void apply_overrides(TrainConfig& t, const CommonOpts& o) {
  if (o.seed) t.rng_seed = *o.seed;
  if (o.episodes) t.n_episodes = *o.episodes;
}

std::vector<ConjunctionScenario> scenarios_for(const CommonOpts& o, const ExperimentConfig& cfg, int n) {
  if (!o.scenarios.empty()) return load_scenario_dir(o.scenarios);
  // No directory given: sample the needed scenarios from the configured
  // distribution with the run seed.
  return generate_scenarios(cfg.scenario_distribution, std::max(n, 1), o.seed.value_or(0));
}

void print_episode(const EpisodeMetrics& m) {
  std::printf("episode %4d  reward %12.3f  loss %10.5g  eps %.3f  steps %3d%s\n", m.episode, m.cumulative_reward,
              m.mean_loss, m.epsilon, m.steps, m.collision ? "  collision" : "");
  std::fflush(stdout);
}

int cmd_generate(const CommonOpts& o, int count) {
  const auto cfg = load_config(o);
  const fs::path out = o.out.empty() ? fs::path("scenarios") : fs::path(o.out);
  const auto files = generate_scenario_batch(cfg.scenario_distribution, count, o.seed.value_or(0), out);
  std::printf("wrote %zu scenario files to %s\n", files.size(), out.string().c_str());
  return 0;
}

int cmd_train(const CommonOpts& o, bool quiet) {
  auto cfg = load_config(o);
  apply_overrides(cfg.train, o);
  cfg.train.validate();
  const auto scenarios = scenarios_for(o, cfg, cfg.train.n_environments);
  const auto result = train(cfg.train, cfg.env, scenarios, quiet ? EpisodeCallback{} : EpisodeCallback{print_episode});
  const fs::path out = o.out.empty() ? fs::path("run") : fs::path(o.out);
  save_run(out, cfg.train, cfg.env, result, cfg.grid.tail_window);
  std::printf("trained %zu episodes in %.1f s; tail mean reward %.6g; run saved to %s\n",
              result.metrics.episodes.size(), result.metrics.wall_clock_seconds,
              tail_mean_reward(result.metrics, cfg.grid.tail_window), out.string().c_str());
  return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& policy_name, const std::string& checkpoint, int n_seeds,
                 const std::string& trace_path) {
  const auto cfg = load_config(o);
  const auto scenarios = scenarios_for(o, cfg, 1);
  std::unique_ptr<Policy> policy;
  if (policy_name == "baseline") {
    policy = std::make_unique<ThresholdBaselinePolicy>();
  } else if (policy_name == "zero") {
    policy = std::make_unique<ConstantPolicy>(0);
  } else {
    if (checkpoint.empty()) throw ConfigError("--checkpoint is required for the greedy policy");
    policy = std::make_unique<GreedyQPolicy>(load_checkpoint(checkpoint), cfg.env.max_debris);
  }
  const auto m = evaluate(*policy, scenarios, n_seeds, o.seed.value_or(0), cfg.env);
  std::printf("policy %s over %zu rollouts\n", policy_name.c_str(), m.rollouts.size());
  std::printf("mean_reward %.17g\nstd_reward %.17g\ncollision_rate %.17g\nmean_fuel_used %.17g\n", m.mean_reward,
              m.std_reward, m.collision_rate, m.mean_fuel_used);

  if (!trace_path.empty()) {
    ConjunctionEnv env(cfg.env);
    std::vector<TraceRow> rows;
    rollout(*policy, env, scenarios.front(), derive_seed(o.seed.value_or(0), {0, 0}), &rows);
    write_trace(fs::path(trace_path), rows);
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / "evaluation.csv");
    f << "rollout,cumulative_reward,collision,fuel_used,steps\n";
    char buf[160];
    for (std::size_t k = 0; k < m.rollouts.size(); ++k) {
      const auto& r = m.rollouts[k];
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%.17g,%d\n", k, r.cumulative_reward, r.collision ? 1 : 0,
                    r.fuel_used, r.steps);
      f << buf;
    }
  }
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  auto cfg = load_config(o);
  apply_overrides(cfg.train, o);
  if (o.seed) cfg.grid.master_seed = *o.seed;
  const auto scenarios = scenarios_for(o, cfg, cfg.train.n_environments);
  const fs::path out = o.out.empty() ? fs::path("sweep") : fs::path(o.out);
  const auto ranked = grid_search(cfg.grid, cfg.train, cfg.env, scenarios, out, [](const RunRecord& r) {
    std::printf("cell %3zu rep %2d  %s %.6g\n", r.cell, r.repetition, r.failed ? "FAILED" : "summary", r.summary);
    std::fflush(stdout);
  });
  save_ranking(out / "ranking.csv", ranked);
  std::printf("ranking written to %s\n", (out / "ranking.csv").string().c_str());
  return 0;
}

int cmd_export(const std::string& metrics_path, const std::string& out, int window) {
  const auto metrics = load_metrics(metrics_path);
  const auto table = export_plot_table(metrics, window);
  if (out.empty()) {
    std::cout << table;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << table;
  }
  return 0;
}

void add_common(CLI::App* app, CommonOpts& o, bool scenarios, bool episodes) {
  app->add_option("--config", o.config, "experiment YAML file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--out", o.out, "output directory");
  if (scenarios) app->add_option("--scenarios", o.scenarios, "directory of scenario files")->check(CLI::ExistingDirectory);
  if (episodes) app->add_option("--episodes", o.episodes, "override n_episodes")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-avoidance DRQN workbench"};
  app.require_subcommand(1);

  CommonOpts o;
  int count = 1;
  auto* gen = app.add_subcommand("generate", "write a batch of scenario files");
  add_common(gen, o, false, false);
  gen->add_option("--count", count, "number of scenarios")->check(CLI::PositiveNumber);

  bool quiet = false;
  auto* tr = app.add_subcommand("train", "train a recurrent Q-network");
  add_common(tr, o, true, true);
  tr->add_flag("--quiet", quiet, "no per-episode output");

  std::string policy = "greedy", checkpoint, trace;
  int n_seeds = 20;
  auto* ev = app.add_subcommand("evaluate", "greedy rollouts of a policy");
  add_common(ev, o, true, false);
  ev->add_option("--policy", policy, "greedy, baseline or zero")
      ->check(CLI::IsMember({"greedy", "baseline", "zero"}));
  ev->add_option("--checkpoint", checkpoint, "parameter checkpoint")->check(CLI::ExistingFile);
  ev->add_option("--n-seeds", n_seeds, "noise seeds per scenario")->check(CLI::PositiveNumber);
  ev->add_option("--trace", trace, "write a step trace of the first rollout");

  auto* sw = app.add_subcommand("sweep", "grid search over training hyperparameters");
  add_common(sw, o, true, true);

  std::string metrics_path, export_out;
  int window = 20;
  auto* ex = app.add_subcommand("export", "plot-ready metrics table");
  ex->add_option("--metrics", metrics_path, "metrics.csv of a run")->required()->check(CLI::ExistingFile);
  ex->add_option("--out", export_out, "output file (stdout when omitted)");
  ex->add_option("--window", window, "moving-average window")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(o, count);
    if (*tr) return cmd_train(o, quiet);
    if (*ev) return cmd_evaluate(o, policy, checkpoint, n_seeds, trace);
    if (*sw) return cmd_sweep(o);
    if (*ex) return cmd_export(metrics_path, export_out, window);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
