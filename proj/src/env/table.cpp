#include "gravbench/env/table.hpp"

#include <algorithm>
#include <cmath>

#include "gravbench/error.hpp"

namespace gravbench::env {
namespace {

// Coordinate access by index so the slope and Hermite code run over all six.
double& coord(ObservationRow& r, int k) {
  Vec3& v = k < 3 ? r.star1 : r.star2;
  return k % 3 == 0 ? v.x : (k % 3 == 1 ? v.y : v.z);
}
double coord(const ObservationRow& r, int k) { return coord(const_cast<ObservationRow&>(r), k); }

}  // namespace

ObservationTable::ObservationTable(const sim::DenseTrajectory& traj, const sim::UnitSystem& units) {
  const double L = units.length_to_si;
  const double T = units.time_to_si;
  rows_.reserve(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    rows_.push_back({traj.times[i] / T, traj.star1[i] / L, traj.star2[i] / L});
  }
  compute_slopes();
}

ObservationTable::ObservationTable(std::vector<ObservationRow> rows) : rows_(std::move(rows)) {
  compute_slopes();
}

void ObservationTable::compute_slopes() {
  if (rows_.size() < 3) throw Error(ErrorCode::validation, "observation table needs >= 3 rows");
  for (size_t i = 1; i < rows_.size(); ++i) {
    if (!(rows_[i].time > rows_[i - 1].time)) {
      throw Error(ErrorCode::validation, "observation table times must strictly increase");
    }
  }
  const size_t n = rows_.size();
  slopes_.assign(n, ObservationRow{});
  for (size_t i = 0; i < n; ++i) {
    // Three-point stencil centred where possible, one-sided at the ends.
    const size_t c = std::clamp<size_t>(i, 1, n - 2);
    const double t0 = rows_[c - 1].time;
    const double t1 = rows_[c].time;
    const double t2 = rows_[c + 1].time;
    const double x = rows_[i].time;
    // Derivative at x of the Lagrange parabola through the stencil.
    const double w0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    const double w1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
    const double w2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    slopes_[i].time = rows_[i].time;
    for (int k = 0; k < 6; ++k) {
      coord(slopes_[i], k) =
          w0 * coord(rows_[c - 1], k) + w1 * coord(rows_[c], k) + w2 * coord(rows_[c + 1], k);
    }
  }
}

ObservationRow ObservationTable::at(double t) const {
  if (!(t >= start_time() && t <= end_time())) {
    throw Error(ErrorCode::window, "time outside the table span");
  }
  auto it = std::upper_bound(rows_.begin(), rows_.end(), t,
                             [](double v, const ObservationRow& r) { return v < r.time; });
  const size_t i = static_cast<size_t>(it - rows_.begin()) - 1;
  if (rows_[i].time == t) return rows_[i];

  const ObservationRow& a = rows_[i];
  const ObservationRow& b = rows_[i + 1];
  const double h = b.time - a.time;
  const double s = (t - a.time) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  ObservationRow out;
  out.time = t;
  for (int k = 0; k < 6; ++k) {
    coord(out, k) = h00 * coord(a, k) + h10 * h * coord(slopes_[i], k) + h01 * coord(b, k) +
                    h11 * h * coord(slopes_[i + 1], k);
  }
  return out;
}

}  // namespace gravbench::env
