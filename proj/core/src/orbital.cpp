#include "cavoid/orbital.hpp"

#include <cmath>
#include <string>

#include "cavoid/errors.hpp"

namespace cavoid {
namespace {

constexpr int kNewtonMaxIter = 50;
constexpr double kCircularEccentricity = 1e-11;
constexpr double kEquatorialSine = 1e-14;
constexpr double kDegenerateMomentum = 1e-10;

void check_eccentricity(double e) {
  if (!(e >= 0.0 && e < 1.0)) {
    throw DomainError("eccentricity must lie in [0, 1), got " + std::to_string(e));
  }
}

}  // namespace

double wrap_two_pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_pi(double angle) {
  double r = wrap_two_pi(angle + std::numbers::pi) - std::numbers::pi;
  return r;
}

KeplerianElements KeplerianElements::make(double a, double e, double i, double W, double w,
                                          double M) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("semi-major axis must be positive, got " + std::to_string(a));
  }
  check_eccentricity(e);
  if (!(i >= 0.0 && i <= std::numbers::pi)) {
    throw DomainError("inclination must lie in [0, pi], got " + std::to_string(i));
  }
  return {a, e, i, wrap_two_pi(W), wrap_two_pi(w), wrap_two_pi(M)};
}

double solve_kepler(double M, double e, double tol) {
  check_eccentricity(e);
  if (!(tol > 0.0)) throw DomainError("kepler tolerance must be positive");

  const double m = wrap_two_pi(M);
  if (e == 0.0) return m;

  auto residual = [&](double E) { return E - e * std::sin(E) - m; };

  double E = m;
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    const double f = residual(E);
    if (std::abs(f) <= tol) return E;
    E -= f / (1.0 - e * std::cos(E));
  }
  if (std::abs(residual(E)) <= tol && E >= 0.0 && E < kTwoPi) return E;

  // f is strictly increasing with f(0) = -m <= 0 and f(2 pi) = 2 pi - m > 0.
  double lo = 0.0;
  double hi = kTwoPi;
  E = m;
  for (int iter = 0; iter < 200; ++iter) {
    E = 0.5 * (lo + hi);
    const double f = residual(E);
    if (std::abs(f) <= tol) break;
    if (f < 0.0) {
      lo = E;
    } else {
      hi = E;
    }
  }
  return E;
}

double mean_motion(double a, const GravParams& grav) {
  return std::sqrt(grav.mu_central_body / (a * a * a));
}

double orbital_period(double a, const GravParams& grav) { return kTwoPi / mean_motion(a, grav); }

StateVector elements_to_state(const KeplerianElements& kep, const GravParams& grav) {
  check_eccentricity(kep.e);
  const double mu = grav.mu_central_body;
  const double E = solve_kepler(kep.M, kep.e);
  const double cosE = std::cos(E);
  const double sinE = std::sin(E);
  const double root = std::sqrt(1.0 - kep.e * kep.e);
  const double r = kep.a * (1.0 - kep.e * cosE);

  // Perifocal frame.
  const double x_pf = kep.a * (cosE - kep.e);
  const double y_pf = kep.a * root * sinE;
  const double vfac = std::sqrt(mu * kep.a) / r;
  const double vx_pf = -vfac * sinE;
  const double vy_pf = vfac * root * cosE;

  const double cW = std::cos(kep.W), sW = std::sin(kep.W);
  const double cw = std::cos(kep.w), sw = std::sin(kep.w);
  const double ci = std::cos(kep.i), si = std::sin(kep.i);

  const Vec3 P(cW * cw - sW * sw * ci, sW * cw + cW * sw * ci, sw * si);
  const Vec3 Q(-cW * sw - sW * cw * ci, -sW * sw + cW * cw * ci, cw * si);

  StateVector out;
  out.position = x_pf * P + y_pf * Q;
  out.velocity = vx_pf * P + vy_pf * Q;
  out.epoch = 0.0;
  return out;
}

KeplerianElements state_to_elements(const StateVector& state, const GravParams& grav) {
  const double mu = grav.mu_central_body;
  const Vec3& rv = state.position;
  const Vec3& vv = state.velocity;
  const double r = rv.norm();
  const double v2 = vv.squaredNorm();
  const Vec3 h = rv.cross(vv);
  const double hn = h.norm();

  if (!(r > 0.0) || hn <= kDegenerateMomentum * r * std::sqrt(v2)) {
    throw DegenerateOrbitError("angular momentum is (near) zero; no orbital plane");
  }

  const double inv_a = 2.0 / r - v2 / mu;
  if (!(inv_a > 0.0)) throw HyperbolicOrbitError("state is not gravitationally bound");
  const double a = 1.0 / inv_a;

  const Vec3 e_vec = ((v2 - mu / r) * rv - rv.dot(vv) * vv) / mu;
  double e = e_vec.norm();
  if (e >= 1.0) throw HyperbolicOrbitError("eccentricity >= 1");

  const Vec3 h_hat = h / hn;
  const double i = std::atan2(std::hypot(h_hat.x(), h_hat.y()), h_hat.z());

  Vec3 node(-h.y(), h.x(), 0.0);
  double W = 0.0;
  if (node.norm() > kEquatorialSine * hn) {
    node.normalize();
    W = std::atan2(node.y(), node.x());
  } else {
    node = Vec3::UnitX();
  }
  const Vec3 in_plane = h_hat.cross(node);

  const double u = std::atan2(rv.dot(in_plane), rv.dot(node));  // argument of latitude
  double w = 0.0;
  if (e > kCircularEccentricity) {
    w = std::atan2(e_vec.dot(in_plane), e_vec.dot(node));
  } else {
    e = 0.0;
  }
  const double nu = u - w;

  const double E = std::atan2(std::sqrt(1.0 - e * e) * std::sin(nu), e + std::cos(nu));
  const double M = E - e * std::sin(E);

  return KeplerianElements::make(a, e, i, W, w, M);
}

StateVector propagate(const KeplerianElements& kep, double dt, const GravParams& grav) {
  KeplerianElements moved = kep;
  moved.M = wrap_two_pi(kep.M + mean_motion(kep.a, grav) * dt);
  StateVector s = elements_to_state(moved, grav);
  s.epoch = dt;
  return s;
}

double specific_energy(const StateVector& state, const GravParams& grav) {
  return 0.5 * state.velocity.squaredNorm() - grav.mu_central_body / state.position.norm();
}

double angular_momentum(const StateVector& state) {
  return state.position.cross(state.velocity).norm();
}

}  // namespace cavoid
