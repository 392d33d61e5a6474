#include "gravbench/sim/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gravbench/error.hpp"

namespace gravbench::sim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double checked_separation(const BodyPair& bodies) {
  validate(bodies);
  const double d = norm(separation(bodies));
  if (d == 0.0) throw Error(ErrorCode::singularity, "bodies occupy the same position");
  return d;
}

}  // namespace

std::string describe(const ForceLaw& law) {
  return std::visit(Overloaded{
                        [](const Newtonian&) { return std::string("newtonian"); },
                        [](const ModifiedGravity& m) {
                          std::ostringstream out;
                          out << "modified_gravity(alpha=" << m.alpha << ")";
                          return out.str();
                        },
                        [](const LinearDrag& d) {
                          std::ostringstream out;
                          out << "linear_drag(tau=" << d.tau << " s)";
                          return out.str();
                        },
                    },
                    law);
}

void validate(const ForceLaw& law) {
  if (const auto* m = std::get_if<ModifiedGravity>(&law)) {
    if (!(m->alpha > -1.0 && m->alpha < 1.0)) {
      throw Error(ErrorCode::validation, "modified gravity alpha must lie in (-1, 1)");
    }
    if (!(m->reference_separation >= 0.0) || !std::isfinite(m->reference_separation)) {
      throw Error(ErrorCode::validation, "reference separation must be finite and non-negative");
    }
  }
  if (const auto* d = std::get_if<LinearDrag>(&law)) {
    if (!(d->tau > 0.0) || !std::isfinite(d->tau)) {
      throw Error(ErrorCode::validation, "drag timescale tau must be positive");
    }
  }
}

void validate(const BodyPair& bodies) {
  for (const auto& b : bodies) {
    if (!(b.mass > 0.0) || !std::isfinite(b.mass)) {
      throw Error(ErrorCode::validation, "body mass must be positive and finite");
    }
    if (!is_finite(b.position) || !is_finite(b.velocity)) {
      throw Error(ErrorCode::validation, "body state has non-finite components");
    }
  }
}

VecPair accelerations(const BodyPair& bodies, const ForceLaw& law, double G) {
  const double d = checked_separation(bodies);
  const Vec3 r = separation(bodies);
  double strength = G / (d * d * d);
  if (const auto* m = std::get_if<ModifiedGravity>(&law)) {
    if (!(m->reference_separation > 0.0)) {
      throw Error(ErrorCode::validation, "modified gravity needs a positive reference separation");
    }
    // pow(x, 0) == 1 exactly, so alpha = 0 reproduces the Newtonian result bit-for-bit.
    strength *= std::pow(m->reference_separation / d, m->alpha);
  }
  VecPair acc{(bodies[1].mass * strength) * r, (-bodies[0].mass * strength) * r};
  if (const auto* drag = std::get_if<LinearDrag>(&law)) {
    acc[0] -= bodies[0].velocity / drag->tau;
    acc[1] -= bodies[1].velocity / drag->tau;
  }
  return acc;
}

double total_energy(const BodyPair& bodies, const ForceLaw& law, double G) {
  const double d = checked_separation(bodies);
  const double kinetic = 0.5 * bodies[0].mass * dot(bodies[0].velocity, bodies[0].velocity) +
                         0.5 * bodies[1].mass * dot(bodies[1].velocity, bodies[1].velocity);
  const double gm1m2 = G * bodies[0].mass * bodies[1].mass;
  double potential = -gm1m2 / d;
  if (const auto* m = std::get_if<ModifiedGravity>(&law)) {
    const double a = m->alpha;
    potential = -gm1m2 * std::pow(m->reference_separation / d, a) / ((1.0 + a) * d);
  }
  return kinetic + potential;
}

OsculatingOrbit osculating_orbit(const BodyPair& bodies, double G) {
  const double d = checked_separation(bodies);
  const Vec3 r = separation(bodies);
  const Vec3 v = relative_velocity(bodies);
  OsculatingOrbit o;
  o.mu = G * total_mass(bodies);
  o.specific_energy = 0.5 * dot(v, v) - o.mu / d;
  const Vec3 h = cross(r, v);
  const Vec3 ecc = cross(v, h) / o.mu - r / d;
  o.eccentricity = norm(ecc);
  o.bound = o.specific_energy < 0.0;
  if (o.bound) {
    o.semi_major = -o.mu / (2.0 * o.specific_energy);
    o.periastron = o.semi_major * (1.0 - o.eccentricity);
    o.apoastron = o.semi_major * (1.0 + o.eccentricity);
    o.period = 2.0 * std::numbers::pi * std::sqrt(o.semi_major * o.semi_major * o.semi_major / o.mu);
  } else {
    o.semi_major = o.specific_energy == 0.0 ? std::numeric_limits<double>::infinity()
                                            : -o.mu / (2.0 * o.specific_energy);
    o.periastron = dot(h, h) / (o.mu * (1.0 + o.eccentricity));
    o.apoastron = std::numeric_limits<double>::infinity();
    o.period = std::numeric_limits<double>::infinity();
  }
  return o;
}

RelativeState kepler_state(double mu, double a, double e, double mean_anomaly) {
  if (!(a > 0.0) || !(e >= 0.0 && e < 1.0)) {
    throw Error(ErrorCode::validation, "kepler_state needs a > 0 and 0 <= e < 1");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  double M = std::fmod(mean_anomaly, two_pi);
  if (M < 0.0) M += two_pi;
  double E = e < 0.8 ? M : std::numbers::pi;
  for (int i = 0; i < 100; ++i) {
    const double f = E - e * std::sin(E) - M;
    const double step = f / (1.0 - e * std::cos(E));
    E -= step;
    if (std::abs(step) < 1e-15) break;
  }
  const double b = a * std::sqrt(1.0 - e * e);
  const double n = std::sqrt(mu / (a * a * a));
  const double e_dot = n / (1.0 - e * std::cos(E));
  return {
      Vec3{a * (std::cos(E) - e), b * std::sin(E), 0.0},
      Vec3{-a * std::sin(E) * e_dot, b * std::cos(E) * e_dot, 0.0},
  };
}

}  // namespace gravbench::sim
