#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "gravbench/sim/scenario.hpp"
#include "gravbench/sim/trajectory.hpp"

namespace gravbench::sim {

/// Scenario documents are JSON with explicit units on every dimensional
/// quantity, e.g. {"mass": {"value": 1.0, "unit": "Msun"}}. Values are read
/// with any convertible unit and always written in SI.
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
/// Every *.json file in `dir`, sorted by file name.
std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir);

/// Header row of the trajectory table.
inline constexpr const char* kTrajectoryHeader =
    "time, star1_x, star1_y, star1_z, star2_x, star2_y, star2_z";

/// Writes positions in the scenario's unit system (17 significant digits).
void write_trajectory_csv(std::ostream& out, const DenseTrajectory& traj, const UnitSystem& units);
nlohmann::json trajectory_metadata(const DenseTrajectory& traj, const Scenario& scenario);

/// Writes `<stem>.csv` and `<stem>.meta.json`.
void export_trajectory(const DenseTrajectory& traj, const Scenario& scenario,
                       const std::filesystem::path& stem);

}  // namespace gravbench::sim
