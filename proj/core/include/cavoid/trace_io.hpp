#pragma once

// Episode traces: one CSV row per environment step with the true state,
// the noised observation, the action and the reward components. Intended
// for offline inspection and plotting.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cavoid/env.hpp"

namespace cavoid {

struct TraceRow {
  int step = 0;
  double time = 0.0;
  StateVector protected_state;
  std::vector<StateVector> debris_states;
  Observation observation;
  int action = 0;
  RewardBreakdown reward;
  bool done = false;
};

/// Captures a row from the environment right after env.step().
TraceRow make_trace_row(const ConjunctionEnv& env, int action, const StepResult& result);

/// Header for a trace with n_debris debris objects.
std::string trace_header(int n_debris);
void write_trace(std::ostream& out, const std::vector<TraceRow>& rows);
void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows);

}  // namespace cavoid
