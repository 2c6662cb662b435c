#include "cavoid/metrics_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "cavoid/errors.hpp"
#include "yaml_util.hpp"

namespace cavoid {
namespace {

using yamlio::fmt_double;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& source, std::size_t line, const char* column) {
  if (s.empty()) throw ParseError(source, std::string("empty value in column ") + column, line, 0);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError(source, std::string("bad number '") + s + "' in column " + column, line, 0);
  }
  return v;
}

int parse_int(const std::string& s, const std::string& source, std::size_t line, const char* column) {
  const double v = parse_double(s, source, line, column);
  if (v != std::floor(v)) throw ParseError(source, std::string("expected an integer in column ") + column, line, 0);
  return static_cast<int>(v);
}

}  // namespace

std::string metrics_to_csv(const TrainingMetrics& metrics) {
  std::ostringstream out;
  out << kMetricsHeader << '\n';
  for (const auto& m : metrics.episodes) {
    out << m.episode << ',' << fmt_double(m.cumulative_reward) << ',' << fmt_double(m.mean_loss) << ','
        << fmt_double(m.epsilon) << ',' << m.steps << ',' << m.updates << ',' << (m.collision ? 1 : 0) << ','
        << fmt_double(m.fuel_used) << '\n';
  }
  return out.str();
}

TrainingMetrics metrics_from_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  TrainingMetrics metrics;
  if (!std::getline(in, line)) throw ParseError(source, "missing header row", 1, 0);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw ParseError(source, "unexpected header '" + line + "'", lineno, 0);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) {
      throw ParseError(source, "expected 8 columns, found " + std::to_string(f.size()), lineno, 0);
    }
    EpisodeMetrics m;
    m.episode = parse_int(f[0], source, lineno, "episode");
    m.cumulative_reward = parse_double(f[1], source, lineno, "cumulative_reward");
    m.mean_loss = parse_double(f[2], source, lineno, "mean_loss");
    m.epsilon = parse_double(f[3], source, lineno, "epsilon");
    m.steps = parse_int(f[4], source, lineno, "steps");
    m.updates = parse_int(f[5], source, lineno, "updates");
    m.collision = parse_int(f[6], source, lineno, "collision") != 0;
    m.fuel_used = parse_double(f[7], source, lineno, "fuel_used");
    metrics.episodes.push_back(m);
  }
  return metrics;
}

void save_metrics(const TrainingMetrics& metrics, const std::filesystem::path& path) {
  yamlio::write_file(path, metrics_to_csv(metrics));
}

TrainingMetrics load_metrics(const std::filesystem::path& path) {
  return metrics_from_csv(yamlio::read_file(path), path.string());
}

std::string export_plot_table(const TrainingMetrics& metrics, int window) {
  if (window < 1) throw DomainError("moving-average window must be >= 1");
  std::ostringstream out;
  out << "episode,cumulative_reward,reward_moving_avg,mean_loss,loss_moving_avg,epsilon\n";
  const auto& eps = metrics.episodes;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const std::size_t lo = k + 1 >= static_cast<std::size_t>(window) ? k + 1 - static_cast<std::size_t>(window) : 0;
    double r_sum = 0.0, l_sum = 0.0;
    int l_n = 0;
    for (std::size_t j = lo; j <= k; ++j) {
      r_sum += eps[j].cumulative_reward;
      if (std::isfinite(eps[j].mean_loss)) {
        l_sum += eps[j].mean_loss;
        ++l_n;
      }
    }
    const double r_avg = r_sum / static_cast<double>(k - lo + 1);
    const double l_avg = l_n > 0 ? l_sum / l_n : std::nan("");
    out << eps[k].episode << ',' << fmt_double(eps[k].cumulative_reward) << ',' << fmt_double(r_avg) << ','
        << fmt_double(eps[k].mean_loss) << ',' << fmt_double(l_avg) << ',' << fmt_double(eps[k].epsilon) << '\n';
  }
  return out.str();
}

}  // namespace cavoid
