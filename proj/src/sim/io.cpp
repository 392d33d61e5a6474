#include "gravbench/sim/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "gravbench/error.hpp"

namespace gravbench::sim {
namespace {

using nlohmann::json;

json quantity(double value, const char* unit) { return {{"value", value}, {"unit", unit}}; }

json vector_quantity(const Vec3& v, const char* unit) {
  return {{"value", {v.x, v.y, v.z}}, {"unit", unit}};
}

double read_scalar(const json& q, const Dimension& dim, const char* field) {
  if (!q.is_object() || !q.contains("value") || !q.contains("unit")) {
    throw Error(ErrorCode::validation, std::string("field '") + field + "' needs value and unit");
  }
  const Unit unit = parse_unit(q.at("unit").get<std::string>());
  if (!(unit.dimension == dim)) {
    throw Error(ErrorCode::unit, std::string("field '") + field + "' has unit '" + unit.symbol +
                                     "' of the wrong dimension");
  }
  return q.at("value").get<double>() * unit.to_si;
}

Vec3 read_vector(const json& q, const Dimension& dim, const char* field) {
  if (!q.is_object() || !q.contains("value") || !q.contains("unit") ||
      !q.at("value").is_array() || q.at("value").size() != 3) {
    throw Error(ErrorCode::validation,
                std::string("field '") + field + "' needs a 3-vector value and unit");
  }
  const Unit unit = parse_unit(q.at("unit").get<std::string>());
  if (!(unit.dimension == dim)) {
    throw Error(ErrorCode::unit, std::string("field '") + field + "' has unit '" + unit.symbol +
                                     "' of the wrong dimension");
  }
  const auto& v = q.at("value");
  return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()} * unit.to_si;
}

json force_law_json(const ForceLaw& law) {
  if (const auto* m = std::get_if<ModifiedGravity>(&law)) {
    return {{"kind", "modified_gravity"},
            {"alpha", m->alpha},
            {"reference_separation", quantity(m->reference_separation, "m")}};
  }
  if (const auto* d = std::get_if<LinearDrag>(&law)) {
    return {{"kind", "linear_drag"}, {"tau", quantity(d->tau, "s")}};
  }
  return {{"kind", "newtonian"}};
}

ForceLaw force_law_from_json(const json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "newtonian") return Newtonian{};
  if (kind == "modified_gravity") {
    ModifiedGravity m{doc.at("alpha").get<double>(), 0.0};
    if (doc.contains("reference_separation")) {
      m.reference_separation = read_scalar(doc.at("reference_separation"), kLength,
                                           "reference_separation");
    }
    return m;
  }
  if (kind == "linear_drag") return LinearDrag{read_scalar(doc.at("tau"), kTime, "tau")};
  throw Error(ErrorCode::validation, "unknown force law kind '" + kind + "'");
}

}  // namespace

json to_json(const Scenario& s) {
  json bodies = json::array();
  for (const auto& b : s.bodies) {
    bodies.push_back({{"mass", quantity(b.mass, "kg")},
                      {"position", vector_quantity(b.position, "m")},
                      {"velocity", vector_quantity(b.velocity, "m/s")}});
  }
  return {
      {"id", s.id},
      {"description", s.description},
      {"unit_system", s.unit_system.name},
      {"force_law", force_law_json(s.force_law)},
      {"bodies", bodies},
      {"com_offset", vector_quantity(s.com_offset, "m")},
      {"com_velocity", vector_quantity(s.com_velocity, "m/s")},
      {"n_orbits", s.n_orbits},
      {"samples_per_orbit", s.samples_per_orbit},
      {"unbound", s.unbound},
  };
}

Scenario scenario_from_json(const json& doc) {
  try {
    Scenario s;
    s.id = doc.at("id").get<std::string>();
    s.description = doc.value("description", "");
    s.unit_system = UnitSystem::named(doc.value("unit_system", "si"));
    s.force_law = doc.contains("force_law") ? force_law_from_json(doc.at("force_law"))
                                            : ForceLaw{Newtonian{}};
    const auto& bodies = doc.at("bodies");
    if (!bodies.is_array() || bodies.size() != 2) {
      throw Error(ErrorCode::validation, "scenario must list exactly two bodies");
    }
    for (size_t i = 0; i < 2; ++i) {
      s.bodies[i].mass = read_scalar(bodies[i].at("mass"), kMass, "mass");
      s.bodies[i].position = read_vector(bodies[i].at("position"), kLength, "position");
      s.bodies[i].velocity = read_vector(bodies[i].at("velocity"), kVelocity, "velocity");
    }
    if (doc.contains("com_offset")) s.com_offset = read_vector(doc.at("com_offset"), kLength, "com_offset");
    if (doc.contains("com_velocity")) {
      s.com_velocity = read_vector(doc.at("com_velocity"), kVelocity, "com_velocity");
    }
    s.n_orbits = doc.value("n_orbits", 10);
    s.samples_per_orbit = doc.value("samples_per_orbit", 5000);
    s.unbound = doc.value("unbound", false);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("malformed scenario document: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open scenario file " + path.string());
  try {
    return scenario_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::validation, path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << to_json(scenario).dump(2) << '\n';
}

std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f));
  return out;
}

void write_trajectory_csv(std::ostream& out, const DenseTrajectory& traj, const UnitSystem& units) {
  out << kTrajectoryHeader << '\n';
  const double L = units.length_to_si;
  const double T = units.time_to_si;
  char line[512];
  for (size_t i = 0; i < traj.size(); ++i) {
    const Vec3& a = traj.star1[i];
    const Vec3& b = traj.star2[i];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  traj.times[i] / T, a.x / L, a.y / L, a.z / L, b.x / L, b.y / L, b.z / L);
    out << line;
  }
}

json trajectory_metadata(const DenseTrajectory& traj, const Scenario& scenario) {
  return {
      {"scenario_id", traj.scenario_id},
      {"rows", traj.size()},
      {"time_unit", scenario.unit_system.time_symbol},
      {"length_unit", scenario.unit_system.length_symbol},
      {"end_time", traj.end_time() / scenario.unit_system.time_to_si},
      {"reference_period_s", traj.reference_period},
      {"force_law", describe(scenario.force_law)},
      {"integrator",
       {{"name", traj.integrator.name},
        {"step_policy", traj.integrator.step_policy},
        {"tolerance", traj.integrator.tolerance},
        {"output_step_s", traj.integrator.step}}},
  };
}

void export_trajectory(const DenseTrajectory& traj, const Scenario& scenario,
                       const std::filesystem::path& stem) {
  std::filesystem::path csv = stem;
  csv += ".csv";
  std::filesystem::path meta = stem;
  meta += ".meta.json";
  std::ofstream out(csv);
  if (!out) throw Error(ErrorCode::io, "cannot write " + csv.string());
  write_trajectory_csv(out, traj, scenario.unit_system);
  std::ofstream m(meta);
  if (!m) throw Error(ErrorCode::io, "cannot write " + meta.string());
  m << trajectory_metadata(traj, scenario).dump(2) << '\n';
}

}  // namespace gravbench::sim
