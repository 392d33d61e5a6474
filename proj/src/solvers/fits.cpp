#include <cmath>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/solvers/solvers.hpp"

namespace gravbench::solvers {
namespace {

struct RelativeSeries {
  std::vector<Vec3> position;
  std::vector<Vec3> velocity;
  std::vector<Vec3> acceleration;
};

RelativeSeries relative_series(std::span<const ObservationRow> rows_in) {
  const std::vector<ObservationRow> rows = prepare(rows_in);
  const KinematicSeries k = kinematics(rows);
  RelativeSeries s;
  for (size_t i = 0; i < k.size(); ++i) {
    if (!k.valid[i]) continue;
    s.position.push_back(rows[i].star2 - rows[i].star1);
    s.velocity.push_back(k.star2_velocity[i] - k.star1_velocity[i]);
    s.acceleration.push_back(k.star2_acceleration[i] - k.star1_acceleration[i]);
  }
  return s;
}

Vec3 inverse_square_direction(const Vec3& r) {
  const double d = sim::norm(r);
  return r / (d * d * d);
}

double fit_gm(const RelativeSeries& s) {
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < s.position.size(); ++i) {
    const Vec3 u = -inverse_square_direction(s.position[i]);
    num += sim::dot(s.acceleration[i], u);
    den += sim::dot(u, u);
  }
  if (!(den > 0.0)) throw Error(ErrorCode::conditioning, "no usable accelerations");
  return num / den;
}

}  // namespace

ExponentFit fit_power_law(std::span<const double> separation, std::span<const double> accel) {
  std::vector<double> x;
  std::vector<double> y;
  for (size_t i = 0; i < separation.size(); ++i) {
    if (separation[i] > 0.0 && accel[i] > 0.0) {
      x.push_back(std::log(separation[i]));
      y.push_back(std::log(accel[i]));
    }
  }
  if (x.size() < 3) throw Error(ErrorCode::conditioning, "too few samples for an exponent fit");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi - *lo < 0.05) {
    throw Error(ErrorCode::conditioning, "separation range too narrow to fit an exponent");
  }
  const LineFit fit = fit_line(x, y);
  ExponentFit out;
  out.slope = fit.slope;
  out.alpha = -fit.slope - 2.0;
  out.slope_stderr = fit.slope_stderr;
  out.r_squared = fit.r_squared;
  out.samples = fit.n;
  return out;
}

ExponentFit fit_gravity_exponent(std::span<const ObservationRow> rows) {
  const RelativeSeries s = relative_series(rows);
  std::vector<double> r(s.position.size());
  std::vector<double> a(s.position.size());
  for (size_t i = 0; i < r.size(); ++i) {
    r[i] = sim::norm(s.position[i]);
    a[i] = sim::norm(s.acceleration[i]);
  }
  return fit_power_law(r, a);
}

DragFit fit_drag_timescale(std::span<const ObservationRow> rows) {
  // Drag on both bodies gives d(r x v)/dt = -(r x v)/tau for the relative
  // orbit whatever the eccentricity, so ln|h| falls linearly at rate 1/tau.
  const RelativeSeries s = relative_series(rows);
  const std::vector<ObservationRow> sorted = prepare(rows);
  const size_t n = s.position.size();
  if (n < 4) throw Error(ErrorCode::insufficient_coverage, "too few rows for a drag fit");
  std::vector<double> t;
  std::vector<double> log_h;
  for (size_t i = 0; i < n; ++i) {
    const double h = sim::norm(sim::cross(s.position[i], s.velocity[i]));
    if (!(h > 0.0)) continue;
    t.push_back(sorted[i + 1].time);  // relative_series skips the first row
    log_h.push_back(std::log(h));
  }
  const LineFit fit = fit_line(t, log_h);
  DragFit out;
  out.samples = fit.n;
  out.inverse_tau_stderr = fit.slope_stderr;
  const double inv_tau = -fit.slope;
  const double decay = inv_tau * (t.back() - t.front());
  if (!(inv_tau > 0.0) || decay < 1e-5 || inv_tau < 3.0 * fit.slope_stderr) {
    throw Error(ErrorCode::signal_absent, "no orbital decay detected");
  }
  out.tau = 1.0 / inv_tau;
  return out;
}

BoundFit fit_bound(std::span<const ObservationRow> rows) {
  const RelativeSeries s = relative_series(rows);
  BoundFit out;
  out.gm = fit_gm(s);
  std::vector<double> eps(s.position.size());
  for (size_t i = 0; i < eps.size(); ++i) {
    eps[i] = 0.5 * sim::dot(s.velocity[i], s.velocity[i]) - out.gm / sim::norm(s.position[i]);
  }
  out.specific_energy = median(eps);
  out.bound = out.specific_energy < 0.0;
  return out;
}

}  // namespace gravbench::solvers
