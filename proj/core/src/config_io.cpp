#include "cavoid/config_io.hpp"

#include <algorithm>
#include <cmath>

#include "cavoid/errors.hpp"
#include "scenario_yaml.hpp"

namespace cavoid {
namespace {

using yamlio::emit_double;
using yamlio::Reader;

template <typename T>
void kv(YAML::Emitter& out, const char* key, T value) {
  out << YAML::Key << key << YAML::Value;
  if constexpr (std::is_floating_point_v<T>) {
    emit_double(out, value);
  } else {
    out << value;
  }
}

template <typename T>
void read_into(const Reader& rd, const YAML::Node& map, const char* key, T& field) {
  field = rd.get_or<T>(map, key, field);
}

void emit_train(YAML::Emitter& out, const TrainConfig& t) {
  out << YAML::BeginMap;
  kv(out, "batch_size", t.batch_size);
  kv(out, "hidden_size", t.hidden_size);
  kv(out, "learning_rate", t.learning_rate);
  kv(out, "n_episodes", t.n_episodes);
  kv(out, "buffer_capacity", t.buffer_capacity);
  kv(out, "tau", t.tau);
  kv(out, "n_environments", t.n_environments);
  kv(out, "gamma", t.gamma);
  kv(out, "epsilon_start", t.epsilon_start);
  kv(out, "epsilon_end", t.epsilon_end);
  kv(out, "epsilon_decay_episodes", t.epsilon_decay_episodes);
  kv(out, "seq_len", t.seq_len);
  kv(out, "huber_delta", t.huber_delta);
  kv(out, "reward_scale", t.reward_scale);
  kv(out, "rng_seed", t.rng_seed);
  out << YAML::EndMap;
}

TrainConfig read_train(const Reader& rd, const YAML::Node& n) {
  rd.only_keys(n, {"batch_size", "hidden_size", "learning_rate", "n_episodes", "buffer_capacity", "tau",
                   "n_environments", "gamma", "epsilon_start", "epsilon_end", "epsilon_decay_episodes", "seq_len",
                   "huber_delta", "reward_scale", "rng_seed"});
  TrainConfig t;
  read_into(rd, n, "batch_size", t.batch_size);
  read_into(rd, n, "hidden_size", t.hidden_size);
  read_into(rd, n, "learning_rate", t.learning_rate);
  read_into(rd, n, "n_episodes", t.n_episodes);
  read_into(rd, n, "buffer_capacity", t.buffer_capacity);
  read_into(rd, n, "tau", t.tau);
  read_into(rd, n, "n_environments", t.n_environments);
  read_into(rd, n, "gamma", t.gamma);
  read_into(rd, n, "epsilon_start", t.epsilon_start);
  read_into(rd, n, "epsilon_end", t.epsilon_end);
  read_into(rd, n, "epsilon_decay_episodes", t.epsilon_decay_episodes);
  read_into(rd, n, "seq_len", t.seq_len);
  read_into(rd, n, "huber_delta", t.huber_delta);
  read_into(rd, n, "reward_scale", t.reward_scale);
  read_into(rd, n, "rng_seed", t.rng_seed);
  try {
    t.validate();
  } catch (const ConfigError& e) {
    rd.fail(n, e.what());
  }
  return t;
}

void emit_env(YAML::Emitter& out, const EnvConfig& e) {
  out << YAML::BeginMap;
  kv(out, "dt_step", e.dt_step);
  kv(out, "sigma_obs_pos", e.sigma_obs_pos);
  kv(out, "sigma_obs_vel", e.sigma_obs_vel);
  kv(out, "dv_scale", e.dv_scale);
  kv(out, "sigma_c", e.sigma_c);
  kv(out, "tca_coarse_dt", e.tca_coarse_dt);
  kv(out, "max_debris", e.max_debris);
  out << YAML::Key << "weights" << YAML::Value << YAML::BeginMap;
  kv(out, "w_c", e.weights.collision);
  kv(out, "w_f", e.weights.fuel);
  kv(out, "w_d", e.weights.deviation);
  kv(out, "w_e", e.weights.low_fuel);
  kv(out, "w_t", e.weights.terminal_collision);
  out << YAML::EndMap;
  out << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
  kv(out, "probability", e.thresholds.probability);
  kv(out, "fuel_level", e.thresholds.fuel_level);
  out << YAML::Key << "deviation" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double d : e.thresholds.deviation) emit_double(out, d);
  out << YAML::EndSeq;
  out << YAML::EndMap;
  out << YAML::EndMap;
}

EnvConfig read_env(const Reader& rd, const YAML::Node& n) {
  rd.only_keys(n, {"dt_step", "sigma_obs_pos", "sigma_obs_vel", "dv_scale", "sigma_c", "tca_coarse_dt", "max_debris",
                   "weights", "thresholds"});
  EnvConfig e;
  read_into(rd, n, "dt_step", e.dt_step);
  read_into(rd, n, "sigma_obs_pos", e.sigma_obs_pos);
  read_into(rd, n, "sigma_obs_vel", e.sigma_obs_vel);
  read_into(rd, n, "dv_scale", e.dv_scale);
  read_into(rd, n, "sigma_c", e.sigma_c);
  read_into(rd, n, "tca_coarse_dt", e.tca_coarse_dt);
  read_into(rd, n, "max_debris", e.max_debris);
  if (rd.has(n, "weights")) {
    const YAML::Node w = rd.child(n, "weights");
    rd.only_keys(w, {"w_c", "w_f", "w_d", "w_e", "w_t"});
    read_into(rd, w, "w_c", e.weights.collision);
    read_into(rd, w, "w_f", e.weights.fuel);
    read_into(rd, w, "w_d", e.weights.deviation);
    read_into(rd, w, "w_e", e.weights.low_fuel);
    read_into(rd, w, "w_t", e.weights.terminal_collision);
  }
  if (rd.has(n, "thresholds")) {
    const YAML::Node t = rd.child(n, "thresholds");
    rd.only_keys(t, {"probability", "fuel_level", "deviation"});
    read_into(rd, t, "probability", e.thresholds.probability);
    read_into(rd, t, "fuel_level", e.thresholds.fuel_level);
    if (rd.has(t, "deviation")) {
      const YAML::Node d = rd.child(t, "deviation");
      if (!d.IsSequence() || d.size() != 5) rd.fail(d, "deviation thresholds must list 5 values (a, e, i, W, w)");
      for (std::size_t k = 0; k < 5; ++k) e.thresholds.deviation[k] = rd.as<double>(d[k], "deviation");
    }
  }
  try {
    e.validate();
  } catch (const ConfigError& err) {
    rd.fail(n, err.what());
  }
  return e;
}

void emit_distribution(YAML::Emitter& out, const ScenarioDistribution& d) {
  out << YAML::BeginMap;
  kv(out, "n_debris_min", d.n_debris_min);
  kv(out, "n_debris_max", d.n_debris_max);
  kv(out, "span_min", d.span_min);
  kv(out, "span_max", d.span_max);
  kv(out, "sigma_pos_min", d.sigma_pos_min);
  kv(out, "sigma_pos_max", d.sigma_pos_max);
  kv(out, "sigma_vr_min", d.sigma_vr_min);
  kv(out, "sigma_vr_max", d.sigma_vr_max);
  out << YAML::Key << "theta_ranges" << YAML::Value;
  yamlio::emit_theta_ranges(out, d.theta_ranges);
  kv(out, "sma_min", d.sma_min);
  kv(out, "sma_max", d.sma_max);
  kv(out, "ecc_max", d.ecc_max);
  kv(out, "inc_min", d.inc_min);
  kv(out, "inc_max", d.inc_max);
  kv(out, "protected_radius", d.protected_radius);
  kv(out, "debris_radius", d.debris_radius);
  kv(out, "fuel_capacity", d.fuel_capacity);
  kv(out, "mu", d.mu.mu_central_body);
  out << YAML::EndMap;
}

ScenarioDistribution read_distribution(const Reader& rd, const YAML::Node& n) {
  rd.only_keys(n, {"n_debris_min", "n_debris_max", "span_min", "span_max", "sigma_pos_min", "sigma_pos_max",
                   "sigma_vr_min", "sigma_vr_max", "theta_ranges", "sma_min", "sma_max", "ecc_max", "inc_min",
                   "inc_max", "protected_radius", "debris_radius", "fuel_capacity", "mu"});
  ScenarioDistribution d;
  read_into(rd, n, "n_debris_min", d.n_debris_min);
  read_into(rd, n, "n_debris_max", d.n_debris_max);
  read_into(rd, n, "span_min", d.span_min);
  read_into(rd, n, "span_max", d.span_max);
  read_into(rd, n, "sigma_pos_min", d.sigma_pos_min);
  read_into(rd, n, "sigma_pos_max", d.sigma_pos_max);
  read_into(rd, n, "sigma_vr_min", d.sigma_vr_min);
  read_into(rd, n, "sigma_vr_max", d.sigma_vr_max);
  if (rd.has(n, "theta_ranges")) d.theta_ranges = yamlio::read_theta_ranges(rd, rd.child(n, "theta_ranges"));
  read_into(rd, n, "sma_min", d.sma_min);
  read_into(rd, n, "sma_max", d.sma_max);
  read_into(rd, n, "ecc_max", d.ecc_max);
  read_into(rd, n, "inc_min", d.inc_min);
  read_into(rd, n, "inc_max", d.inc_max);
  read_into(rd, n, "protected_radius", d.protected_radius);
  read_into(rd, n, "debris_radius", d.debris_radius);
  read_into(rd, n, "fuel_capacity", d.fuel_capacity);
  read_into(rd, n, "mu", d.mu.mu_central_body);
  try {
    d.validate();
  } catch (const ConfigError& err) {
    rd.fail(n, err.what());
  }
  return d;
}

void emit_grid(YAML::Emitter& out, const GridSpec& g) {
  out << YAML::BeginMap;
  out << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, values] : g.parameters) {
    out << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : values) emit_double(out, v);
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  kv(out, "repetitions", g.repetitions);
  kv(out, "master_seed", g.master_seed);
  kv(out, "tail_window", g.tail_window);
  out << YAML::EndMap;
}

GridSpec read_grid(const Reader& rd, const YAML::Node& n) {
  rd.only_keys(n, {"parameters", "repetitions", "master_seed", "tail_window"});
  GridSpec g = default_grid();
  if (rd.has(n, "parameters")) {
    g.parameters.clear();
    const YAML::Node p = rd.child(n, "parameters");
    if (!p.IsMap()) rd.fail(p, "grid parameters must be a mapping");
    for (const auto& entry : p) {
      const auto name = entry.first.as<std::string>();
      if (!entry.second.IsSequence()) rd.fail(entry.second, "grid values for '" + name + "' must be a sequence");
      std::vector<double> values;
      for (const auto& v : entry.second) values.push_back(rd.as<double>(v, name));
      g.parameters.emplace_back(name, std::move(values));
    }
  }
  read_into(rd, n, "repetitions", g.repetitions);
  read_into(rd, n, "master_seed", g.master_seed);
  read_into(rd, n, "tail_window", g.tail_window);
  try {
    g.validate();
  } catch (const ConfigError& err) {
    rd.fail(n, err.what());
  }
  return g;
}

}  // namespace

const std::vector<std::string>& train_field_names() {
  static const std::vector<std::string> names{
      "batch_size", "hidden_size", "learning_rate",  "n_episodes",    "buffer_capacity",
      "tau",        "n_environments", "gamma",       "epsilon_start", "epsilon_end",
      "epsilon_decay_episodes", "seq_len", "huber_delta", "reward_scale"};
  return names;
}

void set_train_field(TrainConfig& cfg, const std::string& name, double value) {
  auto as_int = [&](int& field) {
    if (value != std::floor(value) || std::abs(value) > 1e9) {
      throw ConfigError("grid value for '" + name + "' must be an integer");
    }
    field = static_cast<int>(value);
  };
  if (name == "batch_size") as_int(cfg.batch_size);
  else if (name == "hidden_size") as_int(cfg.hidden_size);
  else if (name == "learning_rate") cfg.learning_rate = value;
  else if (name == "n_episodes") as_int(cfg.n_episodes);
  else if (name == "buffer_capacity") as_int(cfg.buffer_capacity);
  else if (name == "tau") cfg.tau = value;
  else if (name == "n_environments") as_int(cfg.n_environments);
  else if (name == "gamma") cfg.gamma = value;
  else if (name == "epsilon_start") cfg.epsilon_start = value;
  else if (name == "epsilon_end") cfg.epsilon_end = value;
  else if (name == "epsilon_decay_episodes") as_int(cfg.epsilon_decay_episodes);
  else if (name == "seq_len") as_int(cfg.seq_len);
  else if (name == "huber_delta") cfg.huber_delta = value;
  else if (name == "reward_scale") cfg.reward_scale = value;
  else throw ConfigError("unknown TrainConfig field '" + name + "'");
}

void GridSpec::validate() const {
  if (parameters.empty()) throw ConfigError("grid has no parameters");
  for (const auto& [name, values] : parameters) {
    const auto& names = train_field_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("grid names unknown TrainConfig field '" + name + "'");
    }
    if (values.empty()) throw ConfigError("grid parameter '" + name + "' has no values");
    TrainConfig probe;
    for (double v : values) set_train_field(probe, name, v);
  }
  if (repetitions < 1) throw ConfigError("grid repetitions must be >= 1");
  if (tail_window < 1) throw ConfigError("tail_window must be >= 1");
}

GridSpec default_grid() {
  GridSpec g;
  g.parameters = {
      {"batch_size", {50, 100}},
      {"tau", {0.05, 0.1, 0.5}},
      {"learning_rate", {1e-3, 1e-4}},
      {"hidden_size", {64, 128}},
  };
  return g;
}

std::string experiment_to_yaml(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "train" << YAML::Value;
  emit_train(out, cfg.train);
  out << YAML::Key << "env" << YAML::Value;
  emit_env(out, cfg.env);
  out << YAML::Key << "scenario_distribution" << YAML::Value;
  emit_distribution(out, cfg.scenario_distribution);
  out << YAML::Key << "grid" << YAML::Value;
  emit_grid(out, cfg.grid);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ExperimentConfig experiment_from_yaml(const std::string& text, const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = yamlio::parse(text, source);
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  rd.only_keys(root, {"train", "env", "scenario_distribution", "grid"});
  if (rd.has(root, "train")) cfg.train = read_train(rd, rd.child(root, "train"));
  if (rd.has(root, "env")) cfg.env = read_env(rd, rd.child(root, "env"));
  if (rd.has(root, "scenario_distribution")) {
    cfg.scenario_distribution = read_distribution(rd, rd.child(root, "scenario_distribution"));
  }
  if (rd.has(root, "grid")) cfg.grid = read_grid(rd, rd.child(root, "grid"));
  return cfg;
}

void save_experiment(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  yamlio::write_file(path, experiment_to_yaml(cfg));
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return experiment_from_yaml(yamlio::read_file(path), path.string());
}

}  // namespace cavoid
