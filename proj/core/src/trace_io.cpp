#include "cavoid/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace cavoid {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_vec(std::ostream& out, const Vec3& v) {
  for (int k = 0; k < 3; ++k) out << ',' << num(v[k]);
}

void put_axes(std::string& h, const std::string& prefix) {
  for (const char* axis : {"x", "y", "z"}) h += "," + prefix + "_" + axis;
}

}  // namespace

TraceRow make_trace_row(const ConjunctionEnv& env, int action, const StepResult& result) {
  const EnvState& s = env.state();
  return TraceRow{s.step_index, s.time,   s.protected_state, s.debris_states,
                  result.observation, action, result.reward, result.done};
}

std::string trace_header(int n_debris) {
  std::string h = "step,time";
  put_axes(h, "true_sc_pos");
  put_axes(h, "true_sc_vel");
  for (int d = 0; d < n_debris; ++d) {
    put_axes(h, "true_deb" + std::to_string(d) + "_pos");
    put_axes(h, "true_deb" + std::to_string(d) + "_vel");
  }
  put_axes(h, "obs_sc_pos");
  put_axes(h, "obs_sc_vel");
  for (int d = 0; d < n_debris; ++d) {
    put_axes(h, "obs_deb" + std::to_string(d) + "_pos");
    put_axes(h, "obs_deb" + std::to_string(d) + "_vel");
  }
  h += ",fuel_fraction,time_fraction,action,collision_penalty,fuel_penalty,deviation_penalty,total,done";
  return h;
}

void write_trace(std::ostream& out, const std::vector<TraceRow>& rows) {
  const int n_debris = rows.empty() ? 0 : static_cast<int>(rows.front().debris_states.size());
  out << trace_header(n_debris) << '\n';
  for (const TraceRow& r : rows) {
    if (static_cast<int>(r.debris_states.size()) != n_debris) {
      throw std::invalid_argument("trace rows disagree on debris count");
    }
    out << r.step << ',' << num(r.time);
    put_vec(out, r.protected_state.position);
    put_vec(out, r.protected_state.velocity);
    for (const auto& d : r.debris_states) {
      put_vec(out, d.position);
      put_vec(out, d.velocity);
    }
    const Observation& o = r.observation;
    put_vec(out, o.protected_pos);
    put_vec(out, o.protected_vel);
    for (std::size_t d = 0; d < o.debris_pos.size(); ++d) {
      put_vec(out, o.debris_pos[d]);
      put_vec(out, o.debris_vel[d]);
    }
    out << ',' << num(o.fuel_fraction) << ',' << num(o.time_fraction) << ',' << r.action << ','
        << num(r.reward.collision_penalty) << ',' << num(r.reward.fuel_penalty) << ','
        << num(r.reward.deviation_penalty) << ',' << num(r.reward.total) << ',' << (r.done ? 1 : 0) << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace(out, rows);
}

}  // namespace cavoid
