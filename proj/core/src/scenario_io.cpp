#include "cavoid/scenario_io.hpp"

#include "scenario_yaml.hpp"

namespace cavoid {
namespace yamlio {

void emit_elements(YAML::Emitter& out, const KeplerianElements& kep) {
  out << YAML::BeginMap;
  out << YAML::Key << "a" << YAML::Value;
  emit_double(out, kep.a);
  out << YAML::Key << "e" << YAML::Value;
  emit_double(out, kep.e);
  out << YAML::Key << "i" << YAML::Value;
  emit_double(out, kep.i);
  out << YAML::Key << "W" << YAML::Value;
  emit_double(out, kep.W);
  out << YAML::Key << "w" << YAML::Value;
  emit_double(out, kep.w);
  out << YAML::Key << "M" << YAML::Value;
  emit_double(out, kep.M);
  out << YAML::EndMap;
}

KeplerianElements read_elements(const Reader& rd, const YAML::Node& node) {
  rd.only_keys(node, {"a", "e", "i", "W", "w", "M"});
  const double a = rd.get<double>(node, "a");
  const double e = rd.get<double>(node, "e");
  const double i = rd.get<double>(node, "i");
  const double W = rd.get<double>(node, "W");
  const double w = rd.get<double>(node, "w");
  const double M = rd.get<double>(node, "M");
  try {
    return KeplerianElements::make(a, e, i, W, w, M);
  } catch (const DomainError& err) {
    rd.fail(node, err.what());
  }
}

void emit_theta_ranges(YAML::Emitter& out, const std::array<AngleRange, 2>& ranges) {
  out << YAML::BeginSeq;
  for (const auto& r : ranges) {
    out << YAML::Flow << YAML::BeginSeq;
    emit_double(out, r.lo);
    emit_double(out, r.hi);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

std::array<AngleRange, 2> read_theta_ranges(const Reader& rd, const YAML::Node& node) {
  if (!node.IsSequence() || node.size() != 2) rd.fail(node, "theta_ranges must hold two intervals");
  std::array<AngleRange, 2> out{};
  for (std::size_t k = 0; k < 2; ++k) {
    const YAML::Node iv = node[k];
    if (!iv.IsSequence() || iv.size() != 2) rd.fail(iv, "each theta range must be [lo, hi]");
    out[k] = {rd.as<double>(iv[0], "theta_ranges"), rd.as<double>(iv[1], "theta_ranges")};
  }
  return out;
}

void emit_scenario_config_body(YAML::Emitter& out, const ScenarioConfig& cfg) {
  out << YAML::Key << "start_time" << YAML::Value;
  emit_double(out, cfg.start_time);
  out << YAML::Key << "end_time" << YAML::Value;
  emit_double(out, cfg.end_time);
  out << YAML::Key << "n_debris" << YAML::Value << cfg.n_debris;
  out << YAML::Key << "sigma_pos" << YAML::Value;
  emit_double(out, cfg.sigma_pos);
  out << YAML::Key << "sigma_vr" << YAML::Value;
  emit_double(out, cfg.sigma_vr);
  out << YAML::Key << "theta_ranges" << YAML::Value;
  emit_theta_ranges(out, cfg.theta_ranges);
  out << YAML::Key << "protected_elements" << YAML::Value;
  emit_elements(out, cfg.protected_elements);
  out << YAML::Key << "protected_radius" << YAML::Value;
  emit_double(out, cfg.protected_radius);
  out << YAML::Key << "debris_radius" << YAML::Value;
  emit_double(out, cfg.debris_radius);
  out << YAML::Key << "fuel_capacity" << YAML::Value;
  emit_double(out, cfg.fuel_capacity);
  out << YAML::Key << "mu" << YAML::Value;
  emit_double(out, cfg.mu.mu_central_body);
  out << YAML::Key << "rng_seed" << YAML::Value << cfg.rng_seed;
}

ScenarioConfig read_scenario_config(const Reader& rd, const YAML::Node& node) {
  rd.only_keys(node, {"start_time", "end_time", "n_debris", "sigma_pos", "sigma_vr", "theta_ranges",
                      "protected_elements", "protected_radius", "debris_radius", "fuel_capacity", "mu",
                      "rng_seed"});
  ScenarioConfig cfg;
  cfg.start_time = rd.get<double>(node, "start_time");
  cfg.end_time = rd.get<double>(node, "end_time");
  cfg.n_debris = rd.get<int>(node, "n_debris");
  cfg.sigma_pos = rd.get<double>(node, "sigma_pos");
  cfg.sigma_vr = rd.get<double>(node, "sigma_vr");
  cfg.theta_ranges = read_theta_ranges(rd, rd.child(node, "theta_ranges"));
  cfg.protected_elements = read_elements(rd, rd.child(node, "protected_elements"));
  cfg.protected_radius = rd.get<double>(node, "protected_radius");
  cfg.debris_radius = rd.get<double>(node, "debris_radius");
  cfg.fuel_capacity = rd.get<double>(node, "fuel_capacity");
  cfg.mu.mu_central_body = rd.get<double>(node, "mu");
  cfg.rng_seed = rd.get<std::uint64_t>(node, "rng_seed");
  try {
    cfg.validate();
  } catch (const ConfigError& err) {
    rd.fail(node, err.what());
  }
  return cfg;
}

}  // namespace yamlio

std::string scenario_to_yaml(const ConjunctionScenario& scenario) {
  using namespace yamlio;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << "cavoid-scenario";
  out << YAML::Key << "version" << YAML::Value << 1;
  out << YAML::Key << "config" << YAML::Value << YAML::BeginMap;
  emit_scenario_config_body(out, scenario.config);
  out << YAML::EndMap;
  out << YAML::Key << "debris" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : scenario.debris) {
    out << YAML::BeginMap;
    out << YAML::Key << "elements" << YAML::Value;
    emit_elements(out, d.elements);
    out << YAML::Key << "collision_time" << YAML::Value;
    emit_double(out, d.collision_time);
    out << YAML::Key << "collision_state" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "position" << YAML::Value;
    emit_vec3(out, d.collision_state.position);
    out << YAML::Key << "velocity" << YAML::Value;
    emit_vec3(out, d.collision_state.velocity);
    out << YAML::Key << "epoch" << YAML::Value;
    emit_double(out, d.collision_state.epoch);
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ConjunctionScenario scenario_from_yaml(const std::string& text, const std::string& source) {
  using namespace yamlio;
  const Reader rd(source);
  const YAML::Node root = parse(text, source);
  if (!root.IsMap()) throw ParseError(source, "scenario document must be a mapping", 1, 0);
  rd.only_keys(root, {"format", "version", "config", "debris"});
  if (rd.get<std::string>(root, "format") != "cavoid-scenario") rd.fail(root, "not a scenario file");
  if (rd.get<int>(root, "version") != 1) rd.fail(root, "unsupported scenario version");

  ConjunctionScenario scenario;
  scenario.config = read_scenario_config(rd, rd.child(root, "config"));
  const YAML::Node debris = rd.child(root, "debris");
  if (!debris.IsSequence()) rd.fail(debris, "'debris' must be a sequence");
  for (const auto& node : debris) {
    rd.only_keys(node, {"elements", "collision_time", "collision_state"});
    DebrisRecord rec;
    rec.elements = read_elements(rd, rd.child(node, "elements"));
    rec.collision_time = rd.get<double>(node, "collision_time");
    const YAML::Node cs = rd.child(node, "collision_state");
    rd.only_keys(cs, {"position", "velocity", "epoch"});
    rec.collision_state.position = rd.vec3(cs, "position");
    rec.collision_state.velocity = rd.vec3(cs, "velocity");
    rec.collision_state.epoch = rd.get<double>(cs, "epoch");
    scenario.debris.push_back(rec);
  }
  if (static_cast<int>(scenario.debris.size()) != scenario.config.n_debris) {
    rd.fail(debris, "debris count does not match n_debris");
  }
  return scenario;
}

void save_scenario(const ConjunctionScenario& scenario, const std::filesystem::path& path) {
  yamlio::write_file(path, scenario_to_yaml(scenario));
}

ConjunctionScenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_yaml(yamlio::read_file(path), path.string());
}

}  // namespace cavoid
