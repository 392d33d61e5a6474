#pragma once

#include <span>
#include <vector>

#include "gravbench/sim/trajectory.hpp"

namespace gravbench::env {

using sim::Vec3;

/// One agent-visible sample, in the scenario's presentation units.
struct ObservationRow {
  double time = 0.0;
  Vec3 star1;
  Vec3 star2;

  friend bool operator==(const ObservationRow&, const ObservationRow&) = default;
};

/// Dense positions in presentation units with a C1 piecewise-cubic Hermite
/// interpolant. Knot slopes are second-order finite differences on the
/// (possibly non-uniform) time grid.
class ObservationTable {
 public:
  ObservationTable(const sim::DenseTrajectory& traj, const sim::UnitSystem& units);
  /// Builds directly from rows; times must be strictly increasing.
  explicit ObservationTable(std::vector<ObservationRow> rows);

  const std::vector<ObservationRow>& rows() const { return rows_; }
  double start_time() const { return rows_.front().time; }
  double end_time() const { return rows_.back().time; }

  /// Interpolated row at `t`; exact at knots. `t` must lie in the table span.
  ObservationRow at(double t) const;

 private:
  void compute_slopes();

  std::vector<ObservationRow> rows_;
  std::vector<ObservationRow> slopes_;  // d/dt of each coordinate at each knot
};

}  // namespace gravbench::env
