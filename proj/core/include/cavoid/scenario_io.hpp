#pragma once

// Scenario files: one ConjunctionScenario per YAML document. Every double
// is written with 17 significant digits so a load of a save is value-exact.
//
//   format: cavoid-scenario
//   version: 1
//   config:
//     start_time, end_time, n_debris, sigma_pos, sigma_vr,
//     theta_ranges: [[lo, hi], [lo, hi]],
//     protected_elements: {a, e, i, W, w, M},
//     protected_radius, debris_radius, fuel_capacity, mu, rng_seed
//   debris:
//     - elements: {a, e, i, W, w, M}
//       collision_time: ...
//       collision_state: {position: [x, y, z], velocity: [vx, vy, vz], epoch: t}

#include <filesystem>
#include <string>

#include "cavoid/conjunction.hpp"

namespace cavoid {

std::string scenario_to_yaml(const ConjunctionScenario& scenario);
ConjunctionScenario scenario_from_yaml(const std::string& text, const std::string& source = "<scenario>");

void save_scenario(const ConjunctionScenario& scenario, const std::filesystem::path& path);
ConjunctionScenario load_scenario(const std::filesystem::path& path);

}  // namespace cavoid
