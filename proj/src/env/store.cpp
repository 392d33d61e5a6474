#include "gravbench/env/store.hpp"

#include "gravbench/error.hpp"
#include "gravbench/sim/library.hpp"

namespace gravbench::env {

TrajectoryStore::TrajectoryStore(std::vector<sim::Scenario> scenarios)
    : scenarios_(std::move(scenarios)) {
  for (const auto& s : scenarios_) {
    s.validate();
    if (!entries_.emplace(s.id, std::make_unique<Entry>()).second) {
      throw Error(ErrorCode::validation, "duplicate scenario id '" + s.id + "'");
    }
  }
}

std::shared_ptr<TrajectoryStore> TrajectoryStore::builtin() {
  return std::make_shared<TrajectoryStore>(sim::scenario_library());
}

const sim::Scenario& TrajectoryStore::scenario(const std::string& id) const {
  for (const auto& s : scenarios_) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::not_found, "unknown scenario '" + id + "'");
}

TrajectoryStore::Entry& TrajectoryStore::entry(const std::string& id) {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::not_found, "unknown scenario '" + id + "'");
  Entry& e = *it->second;
  std::call_once(e.once, [&] {
    const sim::Scenario& s = scenario(id);
    auto traj = std::make_shared<const sim::DenseTrajectory>(sim::simulate(s));
    e.table = std::make_shared<const ObservationTable>(*traj, s.unit_system);
    e.trajectory = std::move(traj);
  });
  return e;
}

std::shared_ptr<const sim::DenseTrajectory> TrajectoryStore::trajectory(const std::string& id) {
  return entry(id).trajectory;
}

std::shared_ptr<const ObservationTable> TrajectoryStore::table(const std::string& id) {
  return entry(id).table;
}

std::unique_ptr<ObservationSession> create_session(TrajectoryStore& store,
                                                   const std::string& scenario_id,
                                                   Protocol protocol) {
  return std::make_unique<ObservationSession>(scenario_id, store.table(scenario_id), protocol);
}

}  // namespace gravbench::env
