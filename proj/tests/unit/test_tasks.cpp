#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/sim/library.hpp"
#include "gravbench/sim/orbital_elements.hpp"
#include "gravbench/tasks/catalog.hpp"

using namespace gravbench;
using namespace gravbench::tasks;

namespace {

env::TrajectoryStore& store() {
  static auto s = env::TrajectoryStore::builtin();
  return *s;
}

const Catalog& catalog() {
  static const Catalog c = build_catalog(store());
  return c;
}

constexpr double AU = sim::kAstronomicalUnit;
constexpr double Msun = sim::kSolarMass;
const double kCircularPeriod =
    2.0 * std::numbers::pi * std::sqrt(AU * AU * AU / (sim::kGravitySI * 2.0 * Msun));

std::set<std::string> scenarios_for(const std::string& task) {
  std::set<std::string> out;
  for (const auto& i : catalog().instances) {
    if (i.task.id == task) out.insert(i.scenario_id);
  }
  return out;
}

}  // namespace

TEST_CASE("shipped tasks are valid and bound to solvers") {
  CHECK(shipped_tasks().size() == 15);
  std::set<std::string> ids;
  for (const auto& t : shipped_tasks()) {
    CHECK_NOTHROW(t.validate());
    CHECK(t.threshold_pct >= 5.0);
    CHECK(t.threshold_pct <= 70.0);
    CHECK(measure_from_string(t.solver_binding()) == t.measure);
    ids.insert(t.id);
  }
  CHECK(ids.size() == 15);
  CHECK_THROWS_AS(measure_from_string("spin"), Error);
}

TEST_CASE("pairing: alpha and tau tasks use only their families") {
  CHECK(scenarios_for("gravity_exponent") ==
        std::set<std::string>{"modified_gravity_a", "modified_gravity_b", "modified_gravity_c"});
  CHECK(scenarios_for("drag_timescale") ==
        std::set<std::string>{"drag_slow", "drag_fast", "drag_eccentric"});
  CHECK(scenarios_for("is_bound").count("unbound") == 1);
  CHECK(scenarios_for("periastron").count("eccentric_single_orbit") == 1);
  CHECK(scenarios_for("period").count("modified_gravity_a") == 0);
  CHECK(scenarios_for("fraction_accel_below_mean").count("circular_equal") == 0);
  CHECK(scenarios_for("time_20pct_path").count("proper_motion") == 0);
  bool found = false;
  for (const auto& x : catalog().exclusions) {
    if (x.task_id == "gravity_exponent" && x.scenario_id == "standard") {
      found = true;
      CHECK(x.reason.find("kepler") != std::string::npos);
    }
  }
  CHECK(found);
  const auto& alpha = find_task("gravity_exponent");
  CHECK_THROWS_AS(ground_truth(alpha, sim::find_scenario("standard"),
                               *store().trajectory("standard")),
                  Error);
}

TEST_CASE("catalog size is fixed and deterministic") {
  CHECK(catalog().instances.size() == 114);
  const Catalog again = build_catalog(store());
  REQUIRE(again.instances.size() == catalog().instances.size());
  for (size_t i = 0; i < again.instances.size(); ++i) {
    CHECK(again.instances[i].task.id == catalog().instances[i].task.id);
    CHECK(again.instances[i].scenario_id == catalog().instances[i].scenario_id);
    CHECK(again.instances[i].truth.value == catalog().instances[i].truth.value);
  }
  for (const auto& i : catalog().instances) CHECK(std::isfinite(i.truth.value));
}

TEST_CASE("ground truths on the circular equal-mass system") {
  const auto truth = [](const std::string& task) {
    return catalog().find(task, "circular_equal").truth;
  };
  CHECK(truth("period").value == doctest::Approx(kCircularPeriod).epsilon(1e-12));
  CHECK(truth("period").value == doctest::Approx(2.23e7).epsilon(2e-3));
  CHECK(truth("period").unit == "s");
  CHECK(truth("max_speed_star1").value ==
        doctest::Approx(2.0 * std::numbers::pi * 0.5 * AU / kCircularPeriod).epsilon(1e-8));
  CHECK(truth("max_speed_star1").value == doctest::Approx(2.11e4).epsilon(2e-3));
  CHECK(truth("total_energy").value ==
        doctest::Approx(-sim::kGravitySI * Msun * Msun / (2.0 * AU)).epsilon(1e-12));
  CHECK(truth("total_energy").unit == "J");
  CHECK(truth("mean_distance_star1_com").value == doctest::Approx(0.5 * AU).epsilon(1e-9));
  CHECK(truth("time_20pct_path").value == doctest::Approx(0.2 * kCircularPeriod).epsilon(1e-6));
  CHECK(std::abs(truth("eccentricity").value) < 1e-12);
  CHECK(truth("is_bound").flag == true);
  CHECK(catalog().find("is_bound", "unbound").truth.flag == false);
}

TEST_CASE("constant acceleration resolves to fraction 0") {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> a(4, 7.5);
  CHECK(fraction_below(t, a, time_average(t, a) * (1.0 - 1e-9)) == 0.0);
}

TEST_CASE("input-derived truths are exact") {
  CHECK(catalog().find("gravity_exponent", "modified_gravity_a").truth.value == 0.03);
  const auto& drag = sim::find_scenario("drag_slow");
  CHECK(catalog().find("drag_timescale", "drag_slow").truth.value ==
        std::get<sim::LinearDrag>(drag.force_law).tau);
  const auto& st = sim::find_scenario("standard");
  CHECK(catalog().find("mass_star1", "standard").truth.value == st.bodies[0].mass);
  CHECK(catalog().find("total_mass", "standard").truth.value ==
        st.bodies[0].mass + st.bodies[1].mass);
}

TEST_CASE("trajectory-derived truths agree with orbital diagnostics") {
  for (const char* id : {"standard", "eccentric", "unequal_mass", "com_offset"}) {
    const auto& s = sim::find_scenario(id);
    const auto el =
        sim::orbital_elements(*store().trajectory(id), {s.bodies[0].mass, s.bodies[1].mass});
    CHECK(catalog().find("period", id).truth.value == doctest::Approx(el.period).epsilon(1e-6));
    CHECK(catalog().find("periastron", id).truth.value ==
          doctest::Approx(el.periastron).epsilon(1e-6));
    CHECK(catalog().find("apoastron", id).truth.value ==
          doctest::Approx(el.apoastron).epsilon(1e-6));
    CHECK(catalog().find("eccentricity", id).truth.value ==
          doctest::Approx(el.eccentricity).epsilon(1e-6));
  }
}

TEST_CASE("unit variants give equal truths after conversion") {
  for (const auto& task : shipped_tasks()) {
    if (scenarios_for(task.id).count("standard") == 0) continue;
    const auto& base = catalog().find(task.id, "standard");
    for (const char* variant : {"standard_cgs", "standard_astro"}) {
      const auto& v = catalog().find(task.id, variant);
      const sim::Dimension d = dimension_of(task.measure);
      const double si = v.truth.value * v.units.to_si(d);
      INFO(task.id << " " << variant);
      if (base.truth.value == 0.0) {
        CHECK(si == 0.0);
      } else {
        CHECK(std::abs(si - base.truth.value) / std::abs(base.truth.value) <= 1e-9);
      }
    }
  }
  CHECK(catalog().find("period", "standard_astro").truth.unit == "yr");
  CHECK(catalog().find("total_energy", "standard_cgs").truth.unit == "erg");
}

TEST_CASE("prompts reproduce the template wording") {
  const auto& energy = catalog().find("total_energy", "standard");
  const std::string budget = render_prompt(energy, env::Protocol::budgeted());
  char window[64];
  std::snprintf(window, sizeof window, "[0.0, %.2e] seconds", energy.window_end);
  CHECK(budget.find(window) != std::string::npos);
  CHECK(budget.find("in units of seconds and meters") != std::string::npos);
  CHECK(budget.find("Determine the total energy (K + U) for the system in joules.") !=
        std::string::npos);
  CHECK(budget.find("You must provide your answer in units of J.") != std::string::npos);
  CHECK(budget.find("up to a total of 100 times") != std::string::npos);
  CHECK(budget.find("up to 10 times per observational request") != std::string::npos);
  CHECK(budget.find("DataFrame `df` containing") == std::string::npos);

  const std::string full = render_prompt(catalog().find("apoastron", "standard"),
                                         env::Protocol::full());
  CHECK(full.find("You must provide your answer in units of m.") != std::string::npos);
  CHECK(full.find("A DataFrame `df` containing columns: time, star1_x, star1_y, star1_z, "
                  "star2_x, star2_y, star2_z.") != std::string::npos);
  CHECK(full.find("`Observe`") == std::string::npos);

  const std::string boolean = render_prompt(catalog().find("is_bound", "unbound"),
                                            env::Protocol::full());
  CHECK(boolean.find("True or False") != std::string::npos);

  const std::string astro = render_prompt(catalog().find("period", "standard_astro"),
                                          env::Protocol::budgeted());
  CHECK(astro.find("years and astronomical units (AU)") != std::string::npos);
  CHECK(astro.find("] years.") != std::string::npos);
  CHECK(astro.find("units of yr.") != std::string::npos);
}

TEST_CASE("task JSON round trip and manifest") {
  for (const auto& t : shipped_tasks()) {
    const TaskSpec back = task_from_json(to_json(t));
    CHECK(back.id == t.id);
    CHECK(back.measure == t.measure);
    CHECK(back.threshold_pct == t.threshold_pct);
    CHECK(back.scenario_classes == t.scenario_classes);
  }
  auto j = to_json(find_task("period"));
  j["threshold_pct"] = 90.0;
  CHECK_THROWS_AS(task_from_json(j), Error);
  j["threshold_pct"] = 10.0;
  j["measure"] = "colour";
  CHECK_THROWS_AS(task_from_json(j), Error);

  // A user-defined task joins the catalog with the same machinery.
  TaskSpec custom = find_task("periastron");
  custom.id = "closest_approach";
  custom.threshold_pct = 12.0;
  const Catalog c = build_catalog(store(), {custom});
  CHECK(c.instances.size() == 9);

  const auto m = manifest(catalog());
  CHECK(m["instances"].size() == 114);
  CHECK(m["instances"][0].contains("threshold_pct"));
  CHECK(m["instances"][0].contains("window"));
  CHECK_FALSE(manifest(catalog(), false)["instances"][0].contains("truth"));
  CHECK(m["exclusions"].size() == catalog().exclusions.size());
}
