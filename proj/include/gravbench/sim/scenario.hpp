#pragma once

#include <string>

#include "gravbench/sim/force_law.hpp"
#include "gravbench/sim/state.hpp"
#include "gravbench/sim/units.hpp"

namespace gravbench::sim {

/// A binary system, its force law and simulation horizon. `bodies` describes
/// the internal orbit in SI; the simulator shifts it so that the centre of mass
/// starts at `com_offset` and moves with `com_velocity`.
struct Scenario {
  std::string id;
  std::string description;
  BodyPair bodies;
  ForceLaw force_law = Newtonian{};
  Vec3 com_offset;
  Vec3 com_velocity;
  UnitSystem unit_system = UnitSystem::si();
  int n_orbits = 10;
  int samples_per_orbit = 5000;
  bool unbound = false;  // must be set for hyperbolic initial conditions

  /// Lab-frame initial state with the COM shift applied, and any modified
  /// gravity reference separation resolved.
  BodyPair initial_state() const;
  ForceLaw resolved_force_law() const;

  /// Orbit timescale that sets the horizon and sampling: the osculating Kepler
  /// period for bound systems, otherwise the circular period at the initial
  /// separation.
  double reference_period(double G = kGravitySI) const;
  double horizon(double G = kGravitySI) const { return n_orbits * reference_period(G); }

  /// Throws Error{validation} on any broken invariant.
  void validate() const;
};

/// Two-body orbit builder used by the scenario library: masses in kg, relative
/// semi-major axis in m, starting at `mean_anomaly` (0 = periastron) with the
/// periastron direction rotated by `argument_of_periastron` radians.
BodyPair keplerian_pair(double m1, double m2, double semi_major, double eccentricity,
                        double mean_anomaly = 0.0, double argument_of_periastron = 0.0,
                        double G = kGravitySI);

}  // namespace gravbench::sim
