#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gravbench/env/session.hpp"
#include "gravbench/env/store.hpp"
#include "gravbench/sim/scenario.hpp"
#include "gravbench/sim/trajectory.hpp"

namespace gravbench::tasks {

/// The physical quantity a task asks for. Doubles as the ground-truth and
/// expert-solver binding.
enum class Measure {
  period,
  total_mass,
  mass_star1,
  mass_star2,
  total_energy,
  eccentricity,
  periastron,
  apoastron,
  max_speed_star1,
  mean_distance_star1_com,
  fraction_accel_below_mean,
  time_20pct_path,
  drag_timescale,
  gravity_exponent,
  is_bound,
};

std::string to_string(Measure m);
/// Throws Error{binding} for unknown names.
Measure measure_from_string(std::string_view name);
sim::Dimension dimension_of(Measure m);
bool is_boolean(Measure m);

/// Scenario families used for pairing: "kepler" (Newtonian, bound, two or
/// more orbits), "single_orbit", "unbound", "modified_gravity", "drag".
std::string scenario_class(const sim::Scenario& s);

struct TaskSpec {
  std::string id;
  /// Problem statement. "{unit_word}" is replaced by the plural unit name.
  std::string description;
  Measure measure = Measure::period;
  double threshold_pct = 5.0;
  /// Used instead of the percentage when the true value is zero.
  double absolute_tolerance = 0.0;
  std::vector<std::string> scenario_classes;

  std::string solver_binding() const { return to_string(measure); }
  /// Throws Error{validation}.
  void validate() const;
};

/// Value plus unit; boolean answers carry `flag` and an empty unit.
struct Answer {
  double value = 0.0;
  std::string unit;
  std::optional<bool> flag;
};

struct TaskInstance {
  TaskSpec task;
  std::string scenario_id;
  Answer truth;
  double window_end = 0.0;  // in the scenario's time unit
  sim::UnitSystem units;
};

struct Exclusion {
  std::string task_id;
  std::string scenario_id;
  std::string reason;
};

struct Catalog {
  std::vector<TaskInstance> instances;
  std::vector<Exclusion> exclusions;

  /// Throws Error{not_found}.
  const TaskInstance& find(const std::string& task_id, const std::string& scenario_id) const;
};

/// The fifteen shipped tasks, with their calibrated thresholds.
const std::vector<TaskSpec>& shipped_tasks();
/// Throws Error{not_found}.
const TaskSpec& find_task(const std::string& id);

/// Why `task` cannot be posed on `scenario`, or nullopt when it can.
std::optional<std::string> exclusion_reason(const TaskSpec& task, const sim::Scenario& scenario);

/// Ground truth in the scenario's presentation units. Throws Error{exclusion}
/// when the pairing is inapplicable.
Answer ground_truth(const TaskSpec& task, const sim::Scenario& scenario,
                    const sim::DenseTrajectory& traj);

/// Every applicable pairing of `tasks` with the store's scenarios.
Catalog build_catalog(env::TrajectoryStore& store, const std::vector<TaskSpec>& tasks);
Catalog build_catalog(env::TrajectoryStore& store);

std::string render_prompt(const TaskInstance& instance, const env::Protocol& protocol);

nlohmann::json to_json(const TaskSpec& task);
/// Throws Error{validation} / Error{binding}.
TaskSpec task_from_json(const nlohmann::json& j);
/// Manifest of the catalog: one entry per instance plus exclusions.
nlohmann::json manifest(const Catalog& catalog, bool include_truth = true);

}  // namespace gravbench::tasks
