#include "gravbench/sim/scenario.hpp"

#include <cmath>
#include <numbers>

#include "gravbench/error.hpp"
#include "gravbench/sim/dynamics.hpp"

namespace gravbench::sim {

BodyPair Scenario::initial_state() const {
  BodyPair s = bodies;
  const Vec3 shift = com_offset - center_of_mass(bodies);
  const Vec3 boost = com_velocity - center_of_mass_velocity(bodies);
  for (auto& b : s) {
    b.position += shift;
    b.velocity += boost;
  }
  return s;
}

ForceLaw Scenario::resolved_force_law() const {
  ForceLaw law = force_law;
  if (auto* m = std::get_if<ModifiedGravity>(&law); m && m->reference_separation == 0.0) {
    m->reference_separation = norm(separation(bodies));
  }
  return law;
}

double Scenario::reference_period(double G) const {
  const OsculatingOrbit orbit = osculating_orbit(bodies, G);
  if (orbit.bound) return orbit.period;
  const double d = norm(separation(bodies));
  return 2.0 * std::numbers::pi * std::sqrt(d * d * d / orbit.mu);
}

void Scenario::validate() const {
  if (id.empty()) throw Error(ErrorCode::validation, "scenario id must not be empty");
  sim::validate(bodies);
  sim::validate(force_law);
  if (norm(separation(bodies)) == 0.0) {
    throw Error(ErrorCode::singularity, "scenario '" + id + "' starts with coincident bodies");
  }
  if (!is_finite(com_offset) || !is_finite(com_velocity)) {
    throw Error(ErrorCode::validation, "scenario '" + id + "' has a non-finite COM shift");
  }
  if (n_orbits < 1) throw Error(ErrorCode::validation, "n_orbits must be at least 1");
  if (samples_per_orbit < 10) throw Error(ErrorCode::validation, "samples_per_orbit must be >= 10");
  if (bodies[0].position.z != 0.0 || bodies[1].position.z != 0.0 ||
      bodies[0].velocity.z != 0.0 || bodies[1].velocity.z != 0.0 || com_offset.z != 0.0 ||
      com_velocity.z != 0.0) {
    throw Error(ErrorCode::validation, "scenario '" + id + "' leaves the xy-plane");
  }
  const bool bound = osculating_orbit(bodies).bound;
  if (!bound && !unbound) {
    throw Error(ErrorCode::validation,
                "scenario '" + id + "' has unbound initial conditions but is not flagged unbound");
  }
  if (bound && unbound) {
    throw Error(ErrorCode::validation, "scenario '" + id + "' is flagged unbound but is bound");
  }
}

BodyPair keplerian_pair(double m1, double m2, double semi_major, double eccentricity,
                        double mean_anomaly, double argument_of_periastron, double G) {
  const double M = m1 + m2;
  const RelativeState rel = kepler_state(G * M, semi_major, eccentricity, mean_anomaly);
  const double c = std::cos(argument_of_periastron);
  const double s = std::sin(argument_of_periastron);
  auto rotate = [&](const Vec3& v) { return Vec3{c * v.x - s * v.y, s * v.x + c * v.y, 0.0}; };
  const Vec3 r = rotate(rel.position);
  const Vec3 v = rotate(rel.velocity);
  return {BodyState{m1, -(m2 / M) * r, -(m2 / M) * v}, BodyState{m2, (m1 / M) * r, (m1 / M) * v}};
}

}  // namespace gravbench::sim
