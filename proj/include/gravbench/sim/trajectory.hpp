#pragma once

#include <string>
#include <vector>

#include "gravbench/sim/scenario.hpp"

namespace gravbench::sim {

struct IntegratorInfo {
  std::string name;
  std::string step_policy;
  double tolerance = 0.0;  // 0 for fixed-step runs
  double step = 0.0;       // output spacing in s
};

/// Hidden ground truth: dense positions (what agents may see) plus the
/// velocities the integrator produced (reference only).
struct DenseTrajectory {
  std::string scenario_id;
  std::vector<double> times;
  std::vector<Vec3> star1;
  std::vector<Vec3> star2;
  std::vector<Vec3> star1_velocity;
  std::vector<Vec3> star2_velocity;
  IntegratorInfo integrator;
  double reference_period = 0.0;

  size_t size() const { return times.size(); }
  double end_time() const { return times.empty() ? 0.0 : times.back(); }
  BodyPair state_at(size_t i, double m1, double m2) const {
    return {BodyState{m1, star1[i], star1_velocity[i]}, BodyState{m2, star2[i], star2_velocity[i]}};
  }
  Vec3 separation_at(size_t i) const { return star2[i] - star1[i]; }
};

/// Runs the scenario: step_fixed for Newtonian laws, step_adaptive otherwise,
/// sampling `samples_per_orbit` rows per reference period for `n_orbits`.
/// Deterministic. Throws IntegrationError (with the last valid time) if the
/// state blows up.
DenseTrajectory simulate(const Scenario& scenario, double tolerance = 1e-12);

}  // namespace gravbench::sim
