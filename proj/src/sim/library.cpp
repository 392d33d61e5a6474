#include "gravbench/sim/library.hpp"

#include <cmath>
#include <numbers>

#include "gravbench/error.hpp"
#include "gravbench/sim/dynamics.hpp"

namespace gravbench::sim {
namespace {

constexpr double AU = kAstronomicalUnit;
constexpr double Msun = kSolarMass;

Scenario kepler_scenario(std::string id, std::string description, double m1, double m2,
                         double a, double e, double mean_anomaly, double periastron_angle) {
  Scenario s;
  s.id = std::move(id);
  s.description = std::move(description);
  s.bodies = keplerian_pair(m1 * Msun, m2 * Msun, a * AU, e, mean_anomaly, periastron_angle);
  return s;
}

double kepler_period(const Scenario& s) { return osculating_orbit(s.bodies).period; }

std::vector<Scenario> build_library() {
  std::vector<Scenario> lib;

  lib.push_back(kepler_scenario("circular_equal", "Equal solar-mass stars on a 1 AU circular orbit",
                                1.0, 1.0, 1.0, 0.0, 0.0, 0.0));
  lib.push_back(kepler_scenario("standard", "Moderately eccentric binary", 1.2, 0.8, 2.0, 0.35, 1.0,
                                0.7));
  lib.push_back(kepler_scenario("eccentric", "Highly eccentric binary (e = 0.9)", 1.0, 0.6, 1.5, 0.9,
                                2.5, -0.4));
  {
    // Starts shortly after periastron so the earliest close approach is not the minimum.
    Scenario s = kepler_scenario("eccentric_single_orbit",
                                 "A single highly elliptical orbit ending near periastron", 1.5,
                                 1.0, 5.0, 0.95, 0.3, 2.0);
    s.n_orbits = 1;
    s.samples_per_orbit = 100000;
    lib.push_back(s);
  }
  {
    Scenario s = kepler_scenario("proper_motion", "Binary whose centre of mass drifts uniformly",
                                 0.9, 0.7, 1.2, 0.4, 0.3, 1.9);
    s.com_velocity = {1.2e4, -7.0e3, 0.0};
    lib.push_back(s);
  }
  {
    Scenario s = kepler_scenario("com_offset", "Binary with its centre of mass away from the origin",
                                 2.0, 1.0, 3.0, 0.2, 4.0, -2.2);
    s.com_offset = {4.0 * AU, -2.5 * AU, 0.0};
    lib.push_back(s);
  }
  lib.push_back(kepler_scenario("unequal_mass", "Massive primary with a light companion", 5.0, 0.3,
                                0.8, 0.6, 5.5, 0.3));
  {
    // Approaching hyperbolic encounter at 1.3x the local escape speed.
    Scenario s;
    s.id = "unbound";
    s.description = "Two stars on a hyperbolic fly-by";
    const double m = Msun;
    const double d = 2.0 * AU;
    const double v_esc = std::sqrt(2.0 * kGravitySI * 2.0 * m / d);
    const Vec3 rel_v = 1.3 * v_esc * Vec3{-0.3, std::sqrt(1.0 - 0.09), 0.0};
    s.bodies = {BodyState{m, {-0.5 * d, 0.0, 0.0}, -0.5 * rel_v},
                BodyState{m, {0.5 * d, 0.0, 0.0}, 0.5 * rel_v}};
    s.unbound = true;
    lib.push_back(s);
  }

  struct Modified {
    const char* id;
    double alpha, m1, m2, a, e, mean_anomaly, angle;
  };
  for (const Modified& m : {Modified{"modified_gravity_a", 0.03, 1.1, 0.9, 1.5, 0.5, 0.8, 0.5},
                            Modified{"modified_gravity_b", 0.08, 1.6, 0.5, 2.5, 0.45, 3.0, -1.2},
                            Modified{"modified_gravity_c", -0.05, 0.8, 0.8, 1.0, 0.6, 5.0, 2.4}}) {
    Scenario s = kepler_scenario(m.id, "Gravity falling off as r^-(2+alpha)", m.m1, m.m2, m.a, m.e,
                                 m.mean_anomaly, m.angle);
    s.force_law = ModifiedGravity{m.alpha, 0.0};
    lib.push_back(s);
  }

  struct Drag {
    const char* id;
    double tau_in_periods, m1, m2, a, e, mean_anomaly, angle;
  };
  // drag_slow and drag_fast are the same system with tau halved.
  for (const Drag& d : {Drag{"drag_slow", 100.0, 1.0, 0.8, 2.0, 0.2, 0.0, 0.0},
                        Drag{"drag_fast", 50.0, 1.0, 0.8, 2.0, 0.2, 0.0, 0.0},
                        Drag{"drag_eccentric", 60.0, 1.4, 0.6, 1.5, 0.5, 2.0, 1.0}}) {
    Scenario s = kepler_scenario(d.id, "Orbit shrinking under linear drag", d.m1, d.m2, d.a, d.e,
                                 d.mean_anomaly, d.angle);
    s.force_law = LinearDrag{d.tau_in_periods * kepler_period(s)};
    lib.push_back(s);
  }

  for (const UnitSystem& units : {UnitSystem::cgs(), UnitSystem::astro()}) {
    Scenario s = lib[1];
    s.id = "standard_" + units.name;
    s.description = "The standard binary presented in " + units.name + " units";
    s.unit_system = units;
    lib.push_back(s);
  }

  for (const auto& s : lib) s.validate();
  return lib;
}

}  // namespace

const std::vector<Scenario>& scenario_library() {
  static const std::vector<Scenario> lib = build_library();
  return lib;
}

const Scenario& find_scenario(std::string_view id) {
  for (const auto& s : scenario_library()) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::not_found, "unknown scenario '" + std::string(id) + "'");
}

}  // namespace gravbench::sim
