#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/solvers/solvers.hpp"

namespace gravbench::solvers {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 separation_of(const ObservationRow& r) { return r.star2 - r.star1; }

}  // namespace

std::vector<ObservationRow> prepare(std::span<const ObservationRow> rows) {
  std::vector<ObservationRow> out(rows.begin(), rows.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) { return a.time == b.time; }),
            out.end());
  return out;
}

KinematicSeries kinematics(std::span<const ObservationRow> rows) {
  const size_t n = rows.size();
  if (n < 3) throw Error(ErrorCode::validation, "kinematics needs at least 3 rows");
  for (size_t i = 1; i < n; ++i) {
    if (rows[i].time == rows[i - 1].time) {
      throw Error(ErrorCode::validation, "duplicate observation time");
    }
    if (!(rows[i].time > rows[i - 1].time)) {
      throw Error(ErrorCode::validation, "observation times must increase");
    }
  }
  KinematicSeries k;
  k.times.resize(n);
  k.star1_velocity.assign(n, Vec3{});
  k.star2_velocity.assign(n, Vec3{});
  k.star1_acceleration.assign(n, Vec3{});
  k.star2_acceleration.assign(n, Vec3{});
  k.separation.resize(n);
  k.valid.assign(n, false);
  for (size_t i = 0; i < n; ++i) {
    k.times[i] = rows[i].time;
    k.separation[i] = sim::norm(separation_of(rows[i]));
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    const double hm = rows[i].time - rows[i - 1].time;
    const double hp = rows[i + 1].time - rows[i].time;
    auto derivs = [&](const Vec3& xm, const Vec3& x0, const Vec3& xp, Vec3& v, Vec3& a) {
      v = (hm * hm * xp - hp * hp * xm + (hp * hp - hm * hm) * x0) / (hm * hp * (hm + hp));
      a = 2.0 * ((xp - x0) / hp - (x0 - xm) / hm) / (hm + hp);
    };
    derivs(rows[i - 1].star1, rows[i].star1, rows[i + 1].star1, k.star1_velocity[i],
           k.star1_acceleration[i]);
    derivs(rows[i - 1].star2, rows[i].star2, rows[i + 1].star2, k.star2_velocity[i],
           k.star2_acceleration[i]);
    k.valid[i] = true;
  }
  return k;
}

std::vector<double> unwrapped_angle(std::span<const ObservationRow> rows) {
  const size_t n = rows.size();
  std::vector<double> raw(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 d = separation_of(rows[i]);
    raw[i] = std::atan2(d.y, d.x);
  }
  // Orientation by majority vote of short-way increments: a fast periastron
  // passage may exceed pi between samples, but most samples sit on slow arcs.
  long votes = 0;
  for (size_t i = 1; i < n; ++i) votes += std::remainder(raw[i] - raw[i - 1], kTwoPi) >= 0.0 ? 1 : -1;
  const double sense = votes >= 0 ? 1.0 : -1.0;
  std::vector<double> theta(n, 0.0);
  for (size_t i = 1; i < n; ++i) {
    double step = sense * (raw[i] - raw[i - 1]);
    step = std::fmod(step, kTwoPi);
    if (step < 0.0) step += kTwoPi;
    theta[i] = theta[i - 1] + step;
  }
  return theta;
}

double estimate_period(std::span<const ObservationRow> rows) {
  if (rows.size() < 3) throw Error(ErrorCode::insufficient_coverage, "too few rows for a period");
  const std::vector<double> theta = unwrapped_angle(rows);
  std::vector<double> t(rows.size());
  std::vector<double> r(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    t[i] = rows[i].time;
    r[i] = sim::norm(separation_of(rows[i]));
  }
  // Reference phase at the widest separation, where the angle moves slowest.
  const size_t apo = static_cast<size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  const double phase = std::fmod(theta[apo], kTwoPi);
  std::vector<double> index;
  std::vector<double> crossing;
  for (int k = 0;; ++k) {
    const double level = phase + kTwoPi * k;
    if (level > theta.back()) break;
    if (level < theta.front()) continue;
    index.push_back(k);
    crossing.push_back(first_crossing(t, theta, level));
  }
  if (crossing.size() < 2) {
    throw Error(ErrorCode::insufficient_coverage, "fewer than two full orbits of angle coverage");
  }
  return fit_line(index, crossing).slope;
}

Masses infer_masses(std::span<const ObservationRow> rows_in, double G) {
  const std::vector<ObservationRow> rows = prepare(rows_in);
  if (rows.size() < 5) throw Error(ErrorCode::insufficient_coverage, "too few rows for masses");
  const std::vector<double> theta = unwrapped_angle(rows);
  if (theta.back() - theta.front() < kTwoPi) {
    throw Error(ErrorCode::insufficient_coverage, "observations span less than one orbit");
  }

  // x1 = -q x2 + (1 + q)(C + V t) per coordinate; coordinates without motion
  // carry no information and are skipped.
  const size_t n = rows.size();
  auto get = [](const Vec3& v, int c) { return c == 0 ? v.x : (c == 1 ? v.y : v.z); };
  std::vector<int> coords;
  for (int c = 0; c < 3; ++c) {
    double lo = get(rows[0].star2, c), hi = lo;
    for (const auto& r : rows) {
      lo = std::min(lo, get(r.star2, c));
      hi = std::max(hi, get(r.star2, c));
    }
    if (hi > lo) coords.push_back(c);
  }
  if (coords.empty()) throw Error(ErrorCode::ambiguity, "star2 does not move");
  const double t0 = rows.front().time;
  const double tspan = rows.back().time - t0;
  const Eigen::Index cols = 1 + 2 * static_cast<Eigen::Index>(coords.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * coords.size()), cols);
  Eigen::VectorXd b(A.rows());
  for (size_t ci = 0; ci < coords.size(); ++ci) {
    for (size_t i = 0; i < n; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(ci * n + i);
      A(row, 0) = -get(rows[i].star2, coords[ci]);
      A(row, 1 + 2 * ci) = 1.0;
      A(row, 2 + 2 * ci) = (rows[i].time - t0) / tspan;
      b(row) = get(rows[i].star1, coords[ci]);
    }
  }
  // Column scaling keeps the problem well conditioned for astronomical values.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (scale(c) == 0.0) throw Error(ErrorCode::ambiguity, "degenerate mass-ratio regression");
    A.col(c) /= scale(c);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-10 * sv(0)) {
    throw Error(ErrorCode::ambiguity, "star2 motion is indistinguishable from drift");
  }
  const Eigen::VectorXd x = svd.solve(b);
  const double q = x(0) / scale(0);
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw Error(ErrorCode::ambiguity, "mass ratio regression gave a non-positive ratio");
  }

  std::vector<double> t(n);
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) {
    t[i] = rows[i].time;
    r[i] = sim::norm(separation_of(rows[i]));
  }
  Masses m;
  m.period = estimate_period(rows);
  m.semi_major = 0.5 * (refined_minimum(t, r).value + refined_maximum(t, r).value);
  m.total = 4.0 * std::numbers::pi * std::numbers::pi * std::pow(m.semi_major, 3) /
            (G * m.period * m.period);
  // x1 + q x2 is the unnormalised centre of mass, so q = m2 / m1.
  m.star1 = m.total / (1.0 + q);
  m.star2 = m.total - m.star1;
  m.ratio = q;
  return m;
}

}  // namespace gravbench::solvers
