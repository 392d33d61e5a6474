#pragma once

#include <array>

#include "gravbench/sim/trajectory.hpp"

namespace gravbench::sim {

struct OrbitalElements {
  double period = 0.0;
  double semi_major = 0.0;
  double eccentricity = 0.0;
  double periastron = 0.0;
  double apoastron = 0.0;
  double kepler_period = 0.0;  // 2 pi sqrt(a^3 / G M) from the supplied masses
};

/// Diagnostics from the dense separation series. Period comes from successive
/// periastron passages (from successive 2 pi sweeps of the separation angle
/// when the orbit is too round to have a well-defined periastron).
/// Throws Error{insufficient_coverage} for unbound or sub-orbit trajectories.
OrbitalElements orbital_elements(const DenseTrajectory& traj, std::array<double, 2> masses,
                                 double G = kGravitySI);

}  // namespace gravbench::sim
