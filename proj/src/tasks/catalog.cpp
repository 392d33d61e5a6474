#include "gravbench/tasks/catalog.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "gravbench/error.hpp"
#include "gravbench/sim/dynamics.hpp"

namespace gravbench::tasks {
namespace {

struct MeasureInfo {
  Measure measure;
  const char* name;
  sim::Dimension dimension;
};

constexpr std::array<MeasureInfo, 15> kMeasures{{
    {Measure::period, "period", sim::kTime},
    {Measure::total_mass, "total_mass", sim::kMass},
    {Measure::mass_star1, "mass_star1", sim::kMass},
    {Measure::mass_star2, "mass_star2", sim::kMass},
    {Measure::total_energy, "total_energy", sim::kEnergy},
    {Measure::eccentricity, "eccentricity", sim::kDimensionless},
    {Measure::periastron, "periastron", sim::kLength},
    {Measure::apoastron, "apoastron", sim::kLength},
    {Measure::max_speed_star1, "max_speed_star1", sim::kVelocity},
    {Measure::mean_distance_star1_com, "mean_distance_star1_com", sim::kLength},
    {Measure::fraction_accel_below_mean, "fraction_accel_below_mean", sim::kDimensionless},
    {Measure::time_20pct_path, "time_20pct_path", sim::kTime},
    {Measure::drag_timescale, "drag_timescale", sim::kTime},
    {Measure::gravity_exponent, "gravity_exponent", sim::kDimensionless},
    {Measure::is_bound, "is_bound", sim::kDimensionless},
}};

const MeasureInfo& info(Measure m) {
  for (const auto& i : kMeasures) {
    if (i.measure == m) return i;
  }
  throw Error(ErrorCode::binding, "unknown measure");
}

const std::vector<std::string> kKnownClasses{"kepler", "single_orbit", "unbound",
                                             "modified_gravity", "drag"};

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  for (size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

std::string format_window(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", t);
  return buf;
}

}  // namespace

std::string to_string(Measure m) { return info(m).name; }

Measure measure_from_string(std::string_view name) {
  for (const auto& i : kMeasures) {
    if (name == i.name) return i.measure;
  }
  throw Error(ErrorCode::binding, "no solver binding named '" + std::string(name) + "'");
}

sim::Dimension dimension_of(Measure m) { return info(m).dimension; }

bool is_boolean(Measure m) { return m == Measure::is_bound; }

std::string scenario_class(const sim::Scenario& s) {
  if (std::holds_alternative<sim::ModifiedGravity>(s.force_law)) return "modified_gravity";
  if (std::holds_alternative<sim::LinearDrag>(s.force_law)) return "drag";
  if (s.unbound) return "unbound";
  return s.n_orbits >= 2 ? "kepler" : "single_orbit";
}

void TaskSpec::validate() const {
  if (id.empty()) throw Error(ErrorCode::validation, "task id is empty");
  if (!(threshold_pct >= 5.0 && threshold_pct <= 70.0)) {
    throw Error(ErrorCode::validation, "task '" + id + "': threshold must lie in [5, 70] percent");
  }
  if (!(absolute_tolerance >= 0.0)) {
    throw Error(ErrorCode::validation, "task '" + id + "': absolute tolerance must be >= 0");
  }
  if (scenario_classes.empty()) {
    throw Error(ErrorCode::validation, "task '" + id + "' applies to no scenario class");
  }
  for (const auto& c : scenario_classes) {
    if (std::find(kKnownClasses.begin(), kKnownClasses.end(), c) == kKnownClasses.end()) {
      throw Error(ErrorCode::validation, "task '" + id + "': unknown scenario class '" + c + "'");
    }
  }
}

const TaskInstance& Catalog::find(const std::string& task_id, const std::string& scenario_id) const {
  for (const auto& i : instances) {
    if (i.task.id == task_id && i.scenario_id == scenario_id) return i;
  }
  throw Error(ErrorCode::not_found, "no instance " + task_id + " x " + scenario_id);
}

const std::vector<TaskSpec>& shipped_tasks() {
  static const std::vector<TaskSpec> tasks = [] {
    const std::vector<std::string> kepler{"kepler"};
    const std::vector<std::string> orbits{"kepler", "single_orbit"};
    std::vector<TaskSpec> t{
        {"period", "Determine the orbital period of the system.", Measure::period, 5.0, 0.0,
         kepler},
        {"total_mass", "Determine the total mass of the system.", Measure::total_mass, 5.0, 0.0,
         kepler},
        {"mass_star1", "Determine the mass of star1.", Measure::mass_star1, 5.0, 0.0, kepler},
        {"mass_star2", "Determine the mass of star2.", Measure::mass_star2, 5.0, 0.0, kepler},
        {"total_energy", "Determine the total energy (K + U) for the system in {unit_word}.",
         Measure::total_energy, 6.43, 0.0, kepler},
        {"eccentricity", "Determine the eccentricity of the system's orbit.",
         Measure::eccentricity, 5.0, 0.01, orbits},
        {"periastron", "Determine the periastron of the system's orbit.", Measure::periastron,
         5.0, 0.0, orbits},
        {"apoastron", "Determine the apoastron of the system's orbit.", Measure::apoastron, 5.0,
         0.0, orbits},
        {"max_speed_star1", "Determine the maximum speed reached by star1.",
         Measure::max_speed_star1, 19.06, 0.0, orbits},
        {"mean_distance_star1_com",
         "Determine the average distance of star1 from the system's center of mass over the "
         "observed time window.",
         Measure::mean_distance_star1_com, 5.0, 0.0, kepler},
        {"fraction_accel_below_mean",
         "Determine the fraction of the observed time window during which the magnitude of "
         "star1's acceleration is below its time-averaged value.",
         Measure::fraction_accel_below_mean, 5.0, 0.0, kepler},
        {"time_20pct_path",
         "Determine the time it takes star1, starting at t = 0, to travel 20% of the length of "
         "its orbital path.",
         Measure::time_20pct_path, 5.0, 0.0, kepler},
        {"drag_timescale",
         "Each star experiences a drag acceleration -v/tau opposing its velocity. Determine the "
         "drag timescale tau.",
         Measure::drag_timescale, 45.95, 0.0, {"drag"}},
        {"gravity_exponent",
         "The gravitational force in this system deviates from Newton's law and scales with "
         "separation r as 1/r^(2+alpha). Determine alpha.",
         Measure::gravity_exponent, 70.0, 0.0, {"modified_gravity"}},
        {"is_bound", "Determine whether the two stars are gravitationally bound to each other.",
         Measure::is_bound, 5.0, 0.0, {"kepler", "single_orbit", "unbound"}},
    };
    return t;
  }();
  return tasks;
}

const TaskSpec& find_task(const std::string& id) {
  for (const auto& t : shipped_tasks()) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::not_found, "unknown task '" + id + "'");
}

std::optional<std::string> exclusion_reason(const TaskSpec& task, const sim::Scenario& scenario) {
  const std::string cls = scenario_class(scenario);
  if (std::find(task.scenario_classes.begin(), task.scenario_classes.end(), cls) ==
      task.scenario_classes.end()) {
    return "task applies to " + nlohmann::json(task.scenario_classes).dump() +
           " scenarios, not " + cls;
  }
  const bool drifting = sim::norm(scenario.com_velocity) > 0.0;
  switch (task.measure) {
    case Measure::fraction_accel_below_mean:
      if (sim::osculating_orbit(scenario.bodies).eccentricity < 1e-6) {
        return "acceleration magnitude is constant on a circular orbit";
      }
      break;
    case Measure::time_20pct_path:
      if (drifting) return "a drifting center of mass leaves the orbital path undefined";
      break;
    default:
      break;
  }
  return std::nullopt;
}

Catalog build_catalog(env::TrajectoryStore& store, const std::vector<TaskSpec>& tasks) {
  Catalog catalog;
  for (const auto& task : tasks) {
    task.validate();
    for (const auto& scenario : store.scenarios()) {
      if (auto reason = exclusion_reason(task, scenario)) {
        catalog.exclusions.push_back({task.id, scenario.id, *reason});
        continue;
      }
      TaskInstance inst;
      inst.task = task;
      inst.scenario_id = scenario.id;
      const auto traj = store.trajectory(scenario.id);
      inst.truth = ground_truth(task, scenario, *traj);
      inst.units = scenario.unit_system;
      inst.window_end = traj->end_time() / scenario.unit_system.time_to_si;
      catalog.instances.push_back(std::move(inst));
    }
  }
  return catalog;
}

Catalog build_catalog(env::TrajectoryStore& store) { return build_catalog(store, shipped_tasks()); }

std::string render_prompt(const TaskInstance& instance, const env::Protocol& protocol) {
  const sim::UnitSystem& u = instance.units;
  std::string description = instance.task.description;
  replace_all(description, "{unit_word}", sim::unit_word(instance.truth.unit));

  std::string answer_line;
  if (is_boolean(instance.task.measure)) {
    answer_line = "You must provide your answer as a boolean: True or False.";
  } else if (instance.truth.unit.empty()) {
    answer_line = "You must provide your answer as a dimensionless number.";
  } else {
    answer_line = "You must provide your answer in units of " + instance.truth.unit + ".";
  }

  const std::string columns = "time, star1_x, star1_y, star1_z, star2_x, star2_y, star2_z";
  std::string out =
      "You are tasked with solving the following physics problem related to a binary star "
      "system. You are provided observations of each star's position over time, (t,x,y,z), in "
      "units of " +
      u.prose() + ".\n\n### Problem Description\n" + description + "\n" + answer_line +
      "\n\n### Additional Instructions\n"
      "To complete this task, you have access to the following tools and data:\n";
  if (protocol.kind == env::ProtocolKind::budget_obs) {
    out +=
        "1. An observational tool called `Observe` that allows you observe the system at\n"
        "specific times of your choosing.\n"
        "2. A code interpreter that can execute Python code.\n\n"
        "When using `Observe`:\n"
        "1. The `times_requested` parameter should be a list that can contain any values in the "
        "time window [0.0, " +
        format_window(instance.window_end) + "] " + sim::unit_word(u.time_symbol) +
        ". You cannot request negative times. The upper limit for the time window was chosen to "
        "guarantee that the problem is solvable with an appropriate sampling of observations "
        "using the total observational budget.\n"
        "2. You can observe the system at any time within the time window, even if it is in the "
        "past compared to the last observation.\n"
        "3. You can observe the system up to a total of " +
        std::to_string(protocol.budget) + " times and you can observe up to " +
        std::to_string(protocol.per_call_cap) +
        " times per observational request which is the maximum length of the `times_requested` "
        "list.\n"
        "4. After each observation, the dataframe `row_wise_results.df` will be updated. It "
        "contains columns: " +
        columns +
        ". You can access it using the code interpreter tool. For example, to access the first "
        "five rows, print(row_wise_results.df.head(n=5))\n\n";
  } else {
    out += "1. A DataFrame `df` containing columns: " + columns +
           ".\n2. A code interpreter with `df` pre-loaded that can execute Python code.\n\n";
  }
  out +=
      "When using the code interpreter:\n"
      "1. Always use print() to display results.\n"
      "2. Do not use read_csv or attempt to load the DataFrame, as it is already pre-loaded\n"
      "Important reminder: Repeated tool access is enabled until you have found the answer and "
      "have submitted it with the `submit_answer` tool.\n";
  return out;
}

nlohmann::json to_json(const TaskSpec& task) {
  return {{"id", task.id},
          {"description", task.description},
          {"measure", to_string(task.measure)},
          {"threshold_pct", task.threshold_pct},
          {"absolute_tolerance", task.absolute_tolerance},
          {"scenario_classes", task.scenario_classes}};
}

TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec t;
  try {
    t.id = j.at("id").get<std::string>();
    t.description = j.at("description").get<std::string>();
    t.measure = measure_from_string(j.at("measure").get<std::string>());
    t.threshold_pct = j.value("threshold_pct", 5.0);
    t.absolute_tolerance = j.value("absolute_tolerance", 0.0);
    t.scenario_classes = j.at("scenario_classes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, std::string("task JSON: ") + e.what());
  }
  t.validate();
  return t;
}

nlohmann::json manifest(const Catalog& catalog, bool include_truth) {
  nlohmann::json inst = nlohmann::json::array();
  for (const auto& i : catalog.instances) {
    nlohmann::json e{{"task", i.task.id},
                     {"scenario", i.scenario_id},
                     {"measure", to_string(i.task.measure)},
                     {"answer_kind", is_boolean(i.task.measure) ? "boolean" : "numeric"},
                     {"units", i.truth.unit},
                     {"threshold_pct", i.task.threshold_pct},
                     {"absolute_tolerance", i.task.absolute_tolerance},
                     {"window", {0.0, i.window_end}},
                     {"time_unit", i.units.time_symbol}};
    if (include_truth) {
      if (i.truth.flag) {
        e["truth"] = *i.truth.flag;
      } else {
        e["truth"] = i.truth.value;
      }
    }
    inst.push_back(std::move(e));
  }
  nlohmann::json excl = nlohmann::json::array();
  for (const auto& x : catalog.exclusions) {
    excl.push_back({{"task", x.task_id}, {"scenario", x.scenario_id}, {"reason", x.reason}});
  }
  return {{"instances", inst}, {"exclusions", excl}};
}

}  // namespace gravbench::tasks
