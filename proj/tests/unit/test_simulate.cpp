#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/sim/dynamics.hpp"
#include "gravbench/sim/io.hpp"
#include "gravbench/sim/library.hpp"
#include "gravbench/sim/orbital_elements.hpp"
#include "gravbench/sim/trajectory.hpp"

using namespace gravbench;
using namespace gravbench::sim;

namespace {

constexpr double AU = kAstronomicalUnit;
constexpr double Msun = kSolarMass;

std::vector<double> separations(const DenseTrajectory& t) {
  std::vector<double> d(t.size());
  for (size_t i = 0; i < t.size(); ++i) d[i] = norm(t.separation_at(i));
  return d;
}

std::array<double, 2> masses(const Scenario& s) { return {s.bodies[0].mass, s.bodies[1].mass}; }

}  // namespace

TEST_CASE("circular-equal: row count, window and Kepler period") {
  const Scenario& s = find_scenario("circular_equal");
  const DenseTrajectory t = simulate(s);
  CHECK(t.size() == 10 * 5000 + 1);
  CHECK(t.times.front() == 0.0);
  CHECK(std::adjacent_find(t.times.begin(), t.times.end(), std::greater_equal<>()) ==
        t.times.end());
  const double T = 2.0 * std::numbers::pi * std::sqrt(AU * AU * AU / (kGravitySI * 2.0 * Msun));
  CHECK(T == doctest::Approx(2.23e7).epsilon(2e-3));
  const OrbitalElements el = orbital_elements(t, masses(s));
  CHECK(el.period == doctest::Approx(T).epsilon(1e-6));
  CHECK(el.eccentricity < 1e-6);
  CHECK(el.periastron == doctest::Approx(AU).epsilon(1e-9));
  CHECK(el.apoastron == doctest::Approx(AU).epsilon(1e-9));
  for (const auto& p : t.star1) CHECK_FALSE(p.z != 0.0);
}

TEST_CASE("e = 0.9: apoastron/periastron = 19 and diagnostics match Kepler") {
  const Scenario& s = find_scenario("eccentric");
  const DenseTrajectory t = simulate(s);
  const std::vector<double> d = separations(t);
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  CHECK(*hi / *lo == doctest::Approx(19.0).epsilon(1e-3));
  const OrbitalElements el = orbital_elements(t, masses(s));
  CHECK(std::abs(el.eccentricity - 0.9) <= 1e-3);
  CHECK(el.period == doctest::Approx(el.kepler_period).epsilon(1e-4));
  CHECK(el.period == doctest::Approx(osculating_orbit(s.bodies).period).epsilon(1e-6));
}

TEST_CASE("Newtonian runs conserve energy to 1e-9 and momentum to 1e-12 over 10 orbits") {
  for (const char* id : {"standard", "eccentric", "proper_motion", "unequal_mass"}) {
    CAPTURE(id);
    const Scenario& s = find_scenario(id);
    const DenseTrajectory t = simulate(s);
    const BodyPair s0 = t.state_at(0, s.bodies[0].mass, s.bodies[1].mass);
    const double e0 = total_energy(s0, Newtonian{});
    const Vec3 p0 = momentum(s0);
    const double p_scale = s0[0].mass * norm(s0[0].velocity) + s0[1].mass * norm(s0[1].velocity);
    double worst_e = 0.0;
    double worst_p = 0.0;
    for (size_t i = 0; i < t.size(); i += 7) {
      const BodyPair si = t.state_at(i, s.bodies[0].mass, s.bodies[1].mass);
      worst_e = std::max(worst_e, std::abs(total_energy(si, Newtonian{}) / e0 - 1.0));
      worst_p = std::max(worst_p, norm(momentum(si) - p0) / p_scale);
    }
    CHECK(worst_e <= 1e-9);
    CHECK(worst_p <= 1e-12);
  }
}

TEST_CASE("proper motion: the centre of mass moves exactly linearly") {
  const Scenario& s = find_scenario("proper_motion");
  const DenseTrajectory t = simulate(s);
  const double m1 = s.bodies[0].mass;
  const double m2 = s.bodies[1].mass;
  std::vector<double> cx(t.size());
  std::vector<double> cy(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    const Vec3 c = (m1 * t.star1[i] + m2 * t.star2[i]) / (m1 + m2);
    cx[i] = c.x;
    cy[i] = c.y;
  }
  const LineFit fx = fit_line(t.times, cx);
  const LineFit fy = fit_line(t.times, cy);
  const double scale = osculating_orbit(s.bodies).semi_major;
  double worst = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    worst = std::max(worst, std::hypot(cx[i] - (fx.intercept + fx.slope * t.times[i]),
                                       cy[i] - (fy.intercept + fy.slope * t.times[i])));
  }
  CHECK(worst / scale <= 1e-9);
  CHECK(fx.slope == doctest::Approx(1.2e4).epsilon(1e-9));
}

TEST_CASE("drag: successive orbital maxima of separation shrink and energy never rises") {
  const Scenario& s = find_scenario("drag_slow");
  const DenseTrajectory t = simulate(s);
  CHECK(t.integrator.name == "rkf78");
  const std::vector<double> d = separations(t);
  const size_t per_orbit = static_cast<size_t>(s.samples_per_orbit);
  double prev_max = std::numeric_limits<double>::infinity();
  for (size_t start = 0; start + per_orbit <= d.size(); start += per_orbit) {
    const double m = *std::max_element(d.begin() + start, d.begin() + start + per_orbit);
    CHECK(m < prev_max);
    prev_max = m;
  }
  const ForceLaw law = s.resolved_force_law();
  double prev_e = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < t.size(); i += 50) {
    const double e = total_energy(t.state_at(i, s.bodies[0].mass, s.bodies[1].mass), law);
    CHECK(e <= prev_e);
    prev_e = e;
  }
}

TEST_CASE("modified gravity: alpha = 0 matches Newtonian, alpha = 0.03 diverges") {
  Scenario newton = find_scenario("modified_gravity_a");
  newton.force_law = Newtonian{};
  Scenario zero = newton;
  zero.force_law = ModifiedGravity{0.0, 0.0};
  const Scenario& modified = find_scenario("modified_gravity_a");
  const DenseTrajectory tn = simulate(newton);
  const DenseTrajectory tz = simulate(zero);
  const DenseTrajectory tm = simulate(modified);
  REQUIRE(tn.size() == tz.size());
  REQUIRE(tn.size() == tm.size());
  const double scale = osculating_orbit(newton.bodies).semi_major;
  double worst_zero = 0.0;
  double worst_mod = 0.0;
  for (size_t i = 0; i < tn.size(); ++i) {
    worst_zero = std::max(worst_zero, norm(tn.separation_at(i) - tz.separation_at(i)) / scale);
    worst_mod = std::max(worst_mod, std::abs(norm(tn.separation_at(i)) - norm(tm.separation_at(i))) / scale);
  }
  CHECK(worst_zero < 1e-8);
  CHECK(worst_mod > 1e-2);
}

TEST_CASE("simulate is deterministic to the byte") {
  const Scenario& s = find_scenario("drag_eccentric");
  std::ostringstream a;
  std::ostringstream b;
  write_trajectory_csv(a, simulate(s), s.unit_system);
  write_trajectory_csv(b, simulate(s), s.unit_system);
  CHECK(a.str() == b.str());
}

TEST_CASE("unbound scenarios run for 10 circular periods of the initial separation") {
  const Scenario& s = find_scenario("unbound");
  const DenseTrajectory t = simulate(s);
  const double d = norm(separation(s.bodies));
  const double analog = 2.0 * std::numbers::pi * std::sqrt(d * d * d / (kGravitySI * 2.0 * Msun));
  CHECK(t.end_time() == doctest::Approx(10.0 * analog).epsilon(1e-12));
  CHECK_THROWS_AS(orbital_elements(t, masses(s)), Error);

  Scenario unflagged = s;
  unflagged.unbound = false;
  CHECK_THROWS_AS(simulate(unflagged), Error);
}

TEST_CASE("orbital_elements needs a full orbit") {
  Scenario s = find_scenario("standard");
  s.n_orbits = 1;
  DenseTrajectory t = simulate(s);
  const size_t keep = t.size() / 2;
  t.times.resize(keep);
  t.star1.resize(keep);
  t.star2.resize(keep);
  try {
    orbital_elements(t, masses(s));
    FAIL("expected insufficient coverage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_coverage);
  }
}

TEST_CASE("library: sixteen valid scenarios with unique ids") {
  const auto& lib = scenario_library();
  CHECK(lib.size() == 16);
  std::set<std::string> ids;
  for (const auto& s : lib) ids.insert(s.id);
  CHECK(ids.size() == lib.size());
  CHECK_THROWS_AS(find_scenario("nope"), Error);
}

TEST_CASE("scenario documents round-trip and accept non-SI units") {
  for (const auto& s : scenario_library()) {
    const Scenario back = scenario_from_json(to_json(s));
    CHECK(back.id == s.id);
    CHECK(back.bodies[0].position == s.bodies[0].position);
    CHECK(back.bodies[1].velocity == s.bodies[1].velocity);
    CHECK(back.force_law.index() == s.force_law.index());
    CHECK(back.unit_system.name == s.unit_system.name);
  }
  nlohmann::json doc = to_json(find_scenario("circular_equal"));
  doc["bodies"][0]["mass"] = {{"value", 1.0}, {"unit", "Msun"}};
  doc["bodies"][1]["position"] = {{"value", {0.5, 0.0, 0.0}}, {"unit", "AU"}};
  const Scenario parsed = scenario_from_json(doc);
  CHECK(parsed.bodies[0].mass == doctest::Approx(Msun));
  CHECK(parsed.bodies[1].position.x == doctest::Approx(0.5 * AU));
  doc["bodies"][0]["mass"] = {{"value", 1.0}, {"unit", "m/s"}};
  CHECK_THROWS_AS(scenario_from_json(doc), Error);
}

TEST_CASE("trajectory export: exact header and unit-system scaling") {
  const Scenario& s = find_scenario("standard_astro");
  Scenario shortened = s;
  shortened.n_orbits = 1;
  shortened.samples_per_orbit = 10;
  const DenseTrajectory t = simulate(shortened);
  std::ostringstream out;
  write_trajectory_csv(out, t, s.unit_system);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "time, star1_x, star1_y, star1_z, star2_x, star2_y, star2_z");
  std::string row;
  std::getline(in, row);
  double x = 0.0;
  double time = 0.0;
  char comma = 0;
  std::istringstream(row) >> time >> comma >> x;
  CHECK(time == 0.0);
  CHECK(x == doctest::Approx(t.star1[0].x / AU).epsilon(1e-15));
  const auto meta = trajectory_metadata(t, s);
  CHECK(meta["length_unit"] == "AU");
  CHECK(meta["rows"] == 11);
}
