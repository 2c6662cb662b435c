#include "cavoid/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cavoid/checkpoint.hpp"
#include "cavoid/errors.hpp"
#include "cavoid/metrics_io.hpp"
#include "cavoid/scenario_io.hpp"
#include "yaml_util.hpp"

namespace cavoid {
namespace fs = std::filesystem;

namespace {

std::string indexed_name(const char* prefix, std::size_t k, int width, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu%s", prefix, width, k, suffix);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

}  // namespace

std::vector<ConjunctionScenario> generate_scenarios(const ScenarioDistribution& dist, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("scenario batch size must be >= 1");
  std::vector<ConjunctionScenario> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      out.push_back(generate_scenario(sample_scenario_config(dist, derive_seed(seed, {idx}))));
    } catch (const std::exception& e) {
      throw ScenarioGenerationError("scenario " + std::to_string(k) + ": " + e.what(), idx);
    }
  }
  return out;
}

std::vector<fs::path> generate_scenario_batch(const ScenarioDistribution& dist, int n, std::uint64_t seed,
                                              const fs::path& out_dir) {
  const auto scenarios = generate_scenarios(dist, n, seed);
  fs::create_directories(out_dir);
  std::vector<fs::path> paths;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    paths.push_back(out_dir / indexed_name("scenario_", k, 4, ".yaml"));
    save_scenario(scenarios[k], paths.back());
  }
  return paths;
}

std::vector<ConjunctionScenario> load_scenario_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParseError(dir.string(), "not a scenario directory", 0, 0);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".yaml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError(dir.string(), "no scenario files found", 0, 0);
  std::vector<ConjunctionScenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f));
  return out;
}

double tail_mean_reward(const TrainingMetrics& metrics, int window) {
  const auto& e = metrics.episodes;
  if (e.empty()) return std::nan("");
  const std::size_t n = std::min(e.size(), static_cast<std::size_t>(std::max(window, 1)));
  double s = 0.0;
  for (std::size_t k = e.size() - n; k < e.size(); ++k) s += e[k].cumulative_reward;
  return s / static_cast<double>(n);
}

TrendReport training_trend(const TrainingMetrics& metrics, int window) {
  std::vector<double> losses, rewards;
  for (const auto& m : metrics.episodes) {
    rewards.push_back(m.cumulative_reward);
    if (m.updates > 0 && std::isfinite(m.mean_loss)) losses.push_back(m.mean_loss);
  }
  auto head = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(v.size(), window)));
  };
  auto tail = [&](const std::vector<double>& v) {
    return std::vector<double>(v.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(v.size(), window)), v.end());
  };
  TrendReport r;
  r.loss_first = mean_of(head(losses));
  r.loss_last = mean_of(tail(losses));
  r.reward_first = mean_of(head(rewards));
  r.reward_last = mean_of(tail(rewards));
  r.loss_decreased = r.loss_last < r.loss_first;
  r.reward_increased = r.reward_last > r.reward_first;
  return r;
}

std::vector<TrainConfig> expand_grid(const GridSpec& spec, const TrainConfig& base) {
  spec.validate();
  std::vector<TrainConfig> cells{base};
  for (const auto& [name, values] : spec.parameters) {
    std::vector<TrainConfig> next;
    next.reserve(cells.size() * values.size());
    for (const auto& c : cells) {
      for (double v : values) {
        TrainConfig t = c;
        set_train_field(t, name, v);
        next.push_back(t);
      }
    }
    cells = std::move(next);
  }
  return cells;
}

std::vector<RunRecord> rank_runs(std::vector<RunRecord> runs) {
  std::stable_sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.failed != b.failed) return !a.failed;
    if (!a.failed && a.summary != b.summary) return a.summary > b.summary;
    if (a.cell != b.cell) return a.cell < b.cell;
    return a.repetition < b.repetition;
  });
  return runs;
}

void save_run(const fs::path& dir, const TrainConfig& train_cfg, const EnvConfig& env_cfg, const TrainResult& result,
              int tail_window) {
  fs::create_directories(dir);
  ExperimentConfig exp;
  exp.train = train_cfg;
  exp.env = env_cfg;
  save_experiment(exp, dir / "config.yaml");
  save_metrics(result.metrics, dir / "metrics.csv");
  save_checkpoint(result.params, dir / "checkpoint.bin");

  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "episodes" << YAML::Value << result.metrics.episodes.size();
  out << YAML::Key << "tail_window" << YAML::Value << tail_window;
  out << YAML::Key << "tail_mean_reward" << YAML::Value;
  yamlio::emit_double(out, tail_mean_reward(result.metrics, tail_window));
  out << YAML::Key << "wall_clock_seconds" << YAML::Value;
  yamlio::emit_double(out, result.metrics.wall_clock_seconds);
  out << YAML::EndMap;
  yamlio::write_file(dir / "summary.yaml", std::string(out.c_str()) + "\n");
}

std::vector<RunRecord> grid_search(const GridSpec& spec, const TrainConfig& base, const EnvConfig& env_cfg,
                                   const std::vector<ConjunctionScenario>& scenarios,
                                   const std::optional<fs::path>& out_dir, const RunCallback& on_run) {
  const auto cells = expand_grid(spec, base);
  std::vector<RunRecord> runs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      RunRecord rec;
      rec.config = cells[c];
      rec.config.rng_seed = derive_seed(spec.master_seed, {c, static_cast<std::uint64_t>(rep)});
      rec.cell = c;
      rec.repetition = rep;
      try {
        const TrainResult result = train(rec.config, env_cfg, scenarios);
        if (out_dir) {
          rec.run_dir = *out_dir / (indexed_name("cell_", c, 3, "") + indexed_name("_rep_", static_cast<std::size_t>(rep), 2, ""));
          save_run(rec.run_dir, rec.config, env_cfg, result, spec.tail_window);
          rec.summary = tail_mean_reward(load_metrics(rec.run_dir / "metrics.csv"), spec.tail_window);
        } else {
          rec.summary = tail_mean_reward(result.metrics, spec.tail_window);
        }
      } catch (const TrainingDivergenceError& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.summary = std::nan("");
      }
      if (on_run) on_run(rec);
      runs.push_back(std::move(rec));
    }
  }
  return rank_runs(std::move(runs));
}

void save_ranking(const fs::path& path, const std::vector<RunRecord>& ranked) {
  std::ostringstream out;
  out << "rank,cell,repetition,summary,failed,batch_size,hidden_size,learning_rate,tau,rng_seed,run_dir\n";
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& r = ranked[k];
    out << k + 1 << ',' << r.cell << ',' << r.repetition << ',' << yamlio::fmt_double(r.summary) << ','
        << (r.failed ? 1 : 0) << ',' << r.config.batch_size << ',' << r.config.hidden_size << ','
        << yamlio::fmt_double(r.config.learning_rate) << ',' << yamlio::fmt_double(r.config.tau) << ','
        << r.config.rng_seed << ',' << r.run_dir.string() << '\n';
  }
  yamlio::write_file(path, out.str());
}

}  // namespace cavoid
