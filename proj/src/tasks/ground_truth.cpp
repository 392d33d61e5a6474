#include <cmath>
#include <vector>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/sim/dynamics.hpp"
#include "gravbench/tasks/catalog.hpp"

namespace gravbench::tasks {
namespace {

using sim::Vec3;

double max_speed_star1(const sim::DenseTrajectory& traj) {
  std::vector<double> speed(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) speed[i] = sim::norm(traj.star1_velocity[i]);
  return refined_maximum(traj.times, speed).value;
}

double mean_distance_star1_com(const sim::DenseTrajectory& traj, double m1, double m2) {
  std::vector<double> d(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    const Vec3 com = (m1 * traj.star1[i] + m2 * traj.star2[i]) / (m1 + m2);
    d[i] = sim::norm(traj.star1[i] - com);
  }
  return time_average(traj.times, d);
}

double fraction_accel_below_mean(const sim::DenseTrajectory& traj, const sim::Scenario& s) {
  const sim::ForceLaw law = s.resolved_force_law();
  std::vector<double> a(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    a[i] = sim::norm(sim::accelerations(traj.state_at(i, s.bodies[0].mass, s.bodies[1].mass), law)[0]);
  }
  const double level = time_average(traj.times, a);
  // Strict inequality with a relative guard so a constant series yields 0.
  return fraction_below(traj.times, a, level * (1.0 - 1e-9));
}

double time_20pct_path(const sim::DenseTrajectory& traj, double period) {
  std::vector<double> arc(traj.size(), 0.0);
  for (size_t i = 1; i < traj.size(); ++i) {
    arc[i] = arc[i - 1] + sim::norm(traj.star1[i] - traj.star1[i - 1]);
  }
  // Arc length over the first orbit, then the time at which 20% of it is covered.
  std::vector<double> t(traj.times.begin(), traj.times.end());
  double orbit_length = 0.0;
  for (size_t i = 1; i < t.size(); ++i) {
    if (t[i] >= period) {
      const double s = (period - t[i - 1]) / (t[i] - t[i - 1]);
      orbit_length = arc[i - 1] + s * (arc[i] - arc[i - 1]);
      break;
    }
  }
  if (orbit_length <= 0.0) {
    throw Error(ErrorCode::insufficient_coverage, "trajectory shorter than one orbit");
  }
  return first_crossing(t, arc, 0.2 * orbit_length);
}

}  // namespace

Answer ground_truth(const TaskSpec& task, const sim::Scenario& scenario,
                    const sim::DenseTrajectory& traj) {
  if (auto reason = exclusion_reason(task, scenario)) {
    throw Error(ErrorCode::exclusion, task.id + " x " + scenario.id + ": " + *reason);
  }
  const double m1 = scenario.bodies[0].mass;
  const double m2 = scenario.bodies[1].mass;
  const sim::OsculatingOrbit orbit = sim::osculating_orbit(scenario.bodies);

  Answer out;
  const sim::Dimension dim = dimension_of(task.measure);
  out.unit = scenario.unit_system.symbol_for(dim);
  double si = 0.0;
  switch (task.measure) {
    case Measure::period: si = orbit.period; break;
    case Measure::total_mass: si = m1 + m2; break;
    case Measure::mass_star1: si = m1; break;
    case Measure::mass_star2: si = m2; break;
    case Measure::total_energy:
      si = sim::total_energy(scenario.initial_state(), scenario.resolved_force_law());
      break;
    case Measure::eccentricity: si = orbit.eccentricity; break;
    case Measure::periastron: si = orbit.periastron; break;
    case Measure::apoastron: si = orbit.apoastron; break;
    case Measure::max_speed_star1: si = max_speed_star1(traj); break;
    case Measure::mean_distance_star1_com: si = mean_distance_star1_com(traj, m1, m2); break;
    case Measure::fraction_accel_below_mean: si = fraction_accel_below_mean(traj, scenario); break;
    case Measure::time_20pct_path: si = time_20pct_path(traj, orbit.period); break;
    case Measure::drag_timescale: si = std::get<sim::LinearDrag>(scenario.force_law).tau; break;
    case Measure::gravity_exponent:
      si = std::get<sim::ModifiedGravity>(scenario.force_law).alpha;
      break;
    case Measure::is_bound:
      out.flag = orbit.bound;
      out.value = orbit.bound ? 1.0 : 0.0;
      return out;
  }
  out.value = si / scenario.unit_system.to_si(dim);
  if (!std::isfinite(out.value)) {
    throw Error(ErrorCode::exclusion, task.id + " x " + scenario.id + ": truth is not finite");
  }
  return out;
}

}  // namespace gravbench::tasks
