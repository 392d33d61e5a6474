#include <cmath>

#include "gravbench/error.hpp"
#include "gravbench/sim/integrators.hpp"
#include "gravbench/sim/trajectory.hpp"

namespace gravbench::sim {
namespace {

void record(DenseTrajectory& traj, double t, const BodyPair& s) {
  traj.times.push_back(t);
  traj.star1.push_back(s[0].position);
  traj.star2.push_back(s[1].position);
  traj.star1_velocity.push_back(s[0].velocity);
  traj.star2_velocity.push_back(s[1].velocity);
}

bool finite_state(const BodyPair& s) {
  return is_finite(s[0].position) && is_finite(s[1].position) && is_finite(s[0].velocity) &&
         is_finite(s[1].velocity);
}

}  // namespace

DenseTrajectory simulate(const Scenario& scenario, double tolerance) {
  scenario.validate();
  const ForceLaw law = scenario.resolved_force_law();
  const double period = scenario.reference_period();
  const long long steps = static_cast<long long>(scenario.n_orbits) * scenario.samples_per_orbit;
  const double dt = period / scenario.samples_per_orbit;

  DenseTrajectory traj;
  traj.scenario_id = scenario.id;
  traj.reference_period = period;
  traj.times.reserve(steps + 1);
  traj.star1.reserve(steps + 1);
  traj.star2.reserve(steps + 1);
  traj.star1_velocity.reserve(steps + 1);
  traj.star2_velocity.reserve(steps + 1);

  BodyPair state = scenario.initial_state();
  record(traj, 0.0, state);

  if (is_newtonian(law)) {
    traj.integrator = {"kepler_split", "fixed", 0.0, dt};
    for (long long k = 1; k <= steps; ++k) {
      try {
        state = step_fixed(state, dt, law);
      } catch (const Error& e) {
        throw IntegrationError(e.what(), traj.times.back());
      }
      if (!finite_state(state)) throw IntegrationError("non-finite state", traj.times.back());
      record(traj, static_cast<double>(k) * dt, state);
    }
    return traj;
  }

  traj.integrator = {"rkf78", "adaptive_pi", tolerance, dt};
  double t = 0.0;
  double h = dt;
  double prev_error = 1.0;
  for (long long k = 1; k <= steps; ++k) {
    const double target = static_cast<double>(k) * dt;
    while (target - t > 1e-9 * dt) {
      const double remaining = target - t;
      const bool clamped = h >= remaining;
      const double trial = clamped ? remaining : h;
      AdaptiveStep step;
      try {
        step = step_adaptive(state, tolerance, law, trial, prev_error);
      } catch (const Error& e) {
        throw IntegrationError(e.what(), traj.times.back());
      }
      if (!finite_state(step.state)) throw IntegrationError("non-finite state", traj.times.back());
      state = step.state;
      t += step.dt_used;
      prev_error = std::max(step.error, 1e-4);
      // A step shortened only to land on an output time says nothing about the
      // natural step size, so keep the controller's previous proposal.
      if (!(clamped && step.dt_used == trial)) h = step.dt_next;
    }
    t = target;
    record(traj, target, state);
  }
  return traj;
}

}  // namespace gravbench::sim
