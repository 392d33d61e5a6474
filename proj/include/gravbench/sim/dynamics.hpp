#pragma once

#include "gravbench/sim/force_law.hpp"
#include "gravbench/sim/state.hpp"
#include "gravbench/sim/units.hpp"

namespace gravbench::sim {

/// Accelerations of both bodies under `law`. Throws Error{singularity} for
/// coincident positions and Error{validation} for non-finite input.
VecPair accelerations(const BodyPair& bodies, const ForceLaw& law, double G = kGravitySI);

/// Kinetic plus potential energy. For modified gravity the potential is the
/// antiderivative of the modified force; drag uses the Newtonian potential.
double total_energy(const BodyPair& bodies, const ForceLaw& law, double G = kGravitySI);

/// Osculating Keplerian description of the relative orbit.
struct OsculatingOrbit {
  double mu = 0.0;              // G (m1 + m2)
  double specific_energy = 0.0; // v^2/2 - mu/r
  double semi_major = 0.0;      // negative for hyperbolic orbits
  double eccentricity = 0.0;
  double periastron = 0.0;
  double apoastron = 0.0;       // infinite when unbound
  double period = 0.0;          // infinite when unbound
  bool bound = false;
};

OsculatingOrbit osculating_orbit(const BodyPair& bodies, double G = kGravitySI);

/// Relative position/velocity at a given mean anomaly of a Keplerian ellipse
/// whose periastron lies along +x, orbiting counter-clockwise in the xy-plane.
struct RelativeState {
  Vec3 position;
  Vec3 velocity;
};
RelativeState kepler_state(double mu, double semi_major, double eccentricity, double mean_anomaly);

}  // namespace gravbench::sim
