#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gravbench/env/session.hpp"
#include "gravbench/sim/units.hpp"
#include "gravbench/tasks/catalog.hpp"

namespace gravbench::solvers {

using env::ObservationRow;
using sim::Vec3;

/// Finite-difference kinematics on a strictly increasing time grid. Entries
/// at masked (boundary) samples are zero.
struct KinematicSeries {
  std::vector<double> times;
  std::vector<Vec3> star1_velocity;
  std::vector<Vec3> star2_velocity;
  std::vector<Vec3> star1_acceleration;
  std::vector<Vec3> star2_acceleration;
  std::vector<double> separation;
  std::vector<bool> valid;

  size_t size() const { return times.size(); }
};

/// Three-point central differences on a non-uniform grid; first and last
/// samples masked. Throws Error{validation} for < 3 rows or non-increasing times.
KinematicSeries kinematics(std::span<const ObservationRow> rows);

/// Sorted by time with exact duplicate times dropped.
std::vector<ObservationRow> prepare(std::span<const ObservationRow> rows);

/// Unwrapped separation angle, assuming the orbit turns one way and consecutive
/// samples are less than one orbit apart.
std::vector<double> unwrapped_angle(std::span<const ObservationRow> rows);

/// Orbital period from successive 2 pi crossings of the separation angle.
/// Throws Error{insufficient_coverage} with fewer than two crossings.
double estimate_period(std::span<const ObservationRow> rows);

struct Masses {
  double star1 = 0.0;
  double star2 = 0.0;
  double ratio = 0.0;  // m2 / m1
  double total = 0.0;
  double semi_major = 0.0;
  double period = 0.0;
};

/// Mass ratio from the straight-line motion of the centre of mass, total mass
/// from Kepler's third law. `G` in the rows' units. Throws
/// Error{insufficient_coverage} below one orbit and Error{ambiguity} when the
/// regression is degenerate.
Masses infer_masses(std::span<const ObservationRow> rows, double G);

struct ExponentFit {
  double alpha = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  size_t samples = 0;
};

/// Regression of log|a_rel| on log r. Throws Error{conditioning} when the
/// separations span less than 5% in log.
ExponentFit fit_power_law(std::span<const double> separation, std::span<const double> accel);
ExponentFit fit_gravity_exponent(std::span<const ObservationRow> rows);

struct DragFit {
  double tau = 0.0;
  double inverse_tau_stderr = 0.0;
  size_t samples = 0;
};

/// Exponential decay of the relative specific angular momentum |r x v|.
/// Throws Error{signal_absent} when no decay is detectable.
DragFit fit_drag_timescale(std::span<const ObservationRow> rows);

/// GM from the relative acceleration and the sign of the median specific
/// orbital energy.
struct BoundFit {
  bool bound = false;
  double gm = 0.0;
  double specific_energy = 0.0;
};
BoundFit fit_bound(std::span<const ObservationRow> rows);

struct Estimate {
  double value = 0.0;
  std::string unit;
  std::optional<bool> flag;
  int observations_spent = 0;
  std::string strategy;
  bool exhausted = false;  // budget ran out before the strategy finished
  nlohmann::json diagnostics = nlohmann::json::object();
};

nlohmann::json to_json(const Estimate& e);

/// Runs the task's expert pipeline on whatever rows are available.
Estimate solve_rows(const tasks::TaskSpec& task, std::span<const ObservationRow> rows,
                    const sim::UnitSystem& units);
/// full_obs session: the complete dense table.
Estimate solve_full(const tasks::TaskSpec& task, env::ObservationSession& session,
                    const sim::UnitSystem& units);
/// budget_obs session: N equally spaced times over the window.
Estimate solve_uniform(const tasks::TaskSpec& task, env::ObservationSession& session, int n,
                       const sim::UnitSystem& units);
/// Best budgeted strategy for the task: adaptive search for extrema, the
/// planned stencil for the gravity exponent, uniform sampling otherwise.
Estimate solve_budgeted(const tasks::TaskSpec& task, env::ObservationSession& session,
                        const sim::UnitSystem& units);

enum class Objective { max_speed, min_separation };

/// Coarse scan, then zooming rounds around the best candidate. Requires
/// budget >= 20 and a budget_obs session.
Estimate adaptive_extremum(env::ObservationSession& session, Objective objective, int budget,
                           const sim::UnitSystem& units);

/// Five-point acceleration stencils at spread centres, then the power-law fit.
Estimate plan_gravity_exponent(env::ObservationSession& session, int budget = 70);

}  // namespace gravbench::solvers
