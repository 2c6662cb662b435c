#pragma once

#include "cavoid/conjunction.hpp"
#include "yaml_util.hpp"

namespace cavoid::yamlio {

void emit_elements(YAML::Emitter& out, const KeplerianElements& kep);
KeplerianElements read_elements(const Reader& rd, const YAML::Node& node);

void emit_theta_ranges(YAML::Emitter& out, const std::array<AngleRange, 2>& ranges);
std::array<AngleRange, 2> read_theta_ranges(const Reader& rd, const YAML::Node& node);

// Emits the key/value pairs of a ScenarioConfig into an open map.
void emit_scenario_config_body(YAML::Emitter& out, const ScenarioConfig& cfg);
ScenarioConfig read_scenario_config(const Reader& rd, const YAML::Node& node);

}  // namespace cavoid::yamlio
