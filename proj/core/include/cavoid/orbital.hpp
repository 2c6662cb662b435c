#pragma once

// Two-body orbital mechanics: Kepler's equation, element <-> state
// conversion and propagation. Everything here is a pure function.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <numbers>

namespace cavoid {

using Vec3 = Eigen::Vector3d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kEarthMu = 3.986004418e14;  // m^3/s^2

struct GravParams {
  double mu_central_body = kEarthMu;
  bool operator==(const GravParams&) const = default;
};

/// Osculating elements. Lengths in meters, angles in radians.
/// Angles W, w and M are kept in [0, 2*pi).
struct KeplerianElements {
  double a = 0.0;  ///< semi-major axis
  double e = 0.0;  ///< eccentricity, elliptical only
  double i = 0.0;  ///< inclination, [0, pi]
  double W = 0.0;  ///< longitude of ascending node
  double w = 0.0;  ///< argument of periapsis
  double M = 0.0;  ///< mean anomaly

  /// Validates and normalizes. Throws DomainError for a <= 0, e outside
  /// [0, 1) or i outside [0, pi].
  static KeplerianElements make(double a, double e, double i, double W, double w, double M);

  bool operator==(const KeplerianElements&) const = default;
};

struct StateVector {
  Vec3 position = Vec3::Zero();  ///< m
  Vec3 velocity = Vec3::Zero();  ///< m/s
  double epoch = 0.0;            ///< s since scenario start

  bool operator==(const StateVector&) const = default;
};

/// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double angle);
/// Wraps an angle into [-pi, pi).
double wrap_pi(double angle);

/// Solves E - e*sin(E) = M for the eccentric anomaly, E in [0, 2*pi).
/// Newton seeded at E = M; bisection if Newton has not met `tol` after
/// 50 iterations.
double solve_kepler(double M, double e, double tol = 1e-12);

double mean_motion(double a, const GravParams& grav);
double orbital_period(double a, const GravParams& grav);

/// Epoch of the returned state is 0; callers stamp their own.
StateVector elements_to_state(const KeplerianElements& kep, const GravParams& grav);

/// Throws DegenerateOrbitError for (near) zero angular momentum and
/// HyperbolicOrbitError when the state is not bound.
KeplerianElements state_to_elements(const StateVector& state, const GravParams& grav);

/// State after `dt` seconds of two-body motion; the returned epoch is `dt`.
StateVector propagate(const KeplerianElements& kep, double dt, const GravParams& grav);

double specific_energy(const StateVector& state, const GravParams& grav);
double angular_momentum(const StateVector& state);

/// Elements plus the epoch they are osculating at.
struct OrbitAtEpoch {
  KeplerianElements elements;
  double epoch = 0.0;
};

// Same call shape as an SGP4 wrapper: (elements, dt) -> state. Perturbed
// propagators can be swapped in behind it.
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual StateVector propagate(const KeplerianElements& kep, double dt) const = 0;

  /// State of `orbit` at absolute time `t`.
  StateVector state_at(const OrbitAtEpoch& orbit, double t) const {
    StateVector s = propagate(orbit.elements, t - orbit.epoch);
    s.epoch = t;
    return s;
  }
};

class TwoBodyPropagator final : public Propagator {
 public:
  explicit TwoBodyPropagator(GravParams grav = {}) : grav_(grav) {}
  StateVector propagate(const KeplerianElements& kep, double dt) const override {
    return cavoid::propagate(kep, dt, grav_);
  }
  const GravParams& grav() const { return grav_; }

 private:
  GravParams grav_;
};

}  // namespace cavoid
