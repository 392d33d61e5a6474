#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gravbench/env/session.hpp"
#include "gravbench/sim/scenario.hpp"

namespace gravbench::env {

/// Scenario registry with lazily simulated, shared dense trajectories.
/// Thread-safe; each scenario is simulated at most once.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::vector<sim::Scenario> scenarios);
  /// The built-in scenario library.
  static std::shared_ptr<TrajectoryStore> builtin();

  const std::vector<sim::Scenario>& scenarios() const { return scenarios_; }
  /// Throws Error{not_found}.
  const sim::Scenario& scenario(const std::string& id) const;
  std::shared_ptr<const sim::DenseTrajectory> trajectory(const std::string& id);
  std::shared_ptr<const ObservationTable> table(const std::string& id);

 private:
  struct Entry {
    std::once_flag once;
    std::shared_ptr<const sim::DenseTrajectory> trajectory;
    std::shared_ptr<const ObservationTable> table;
  };
  Entry& entry(const std::string& id);

  std::vector<sim::Scenario> scenarios_;
  std::map<std::string, std::unique_ptr<Entry>> entries_;
};

/// Opens a session on a scenario of `store`. Throws Error{not_found}.
std::unique_ptr<ObservationSession> create_session(TrajectoryStore& store,
                                                   const std::string& scenario_id,
                                                   Protocol protocol);

}  // namespace gravbench::env
