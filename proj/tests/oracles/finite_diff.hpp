#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

// Central differences of f with respect to every entry of x.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          Eigen::VectorXd x, double eps = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + eps;
    const double up = f(x);
    x[k] = keep - eps;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * eps);
  }
  return g;
}

// Max over entries of |a - b| / max(|a|, |b|, floor). The floor keeps
// entries that are zero up to rounding from dominating.
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a[k]), std::abs(b[k]), floor});
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

}  // namespace oracle
