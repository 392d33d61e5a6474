#include "gravbench/sim/orbital_elements.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"

namespace gravbench::sim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> unwrapped_angles(const DenseTrajectory& traj) {
  std::vector<double> theta(traj.size());
  double offset = 0.0;
  double prev = 0.0;
  for (size_t i = 0; i < traj.size(); ++i) {
    const Vec3 r = traj.separation_at(i);
    const double raw = std::atan2(r.y, r.x);
    if (i > 0) {
      double delta = raw - prev;
      if (delta > std::numbers::pi) offset -= kTwoPi;
      if (delta < -std::numbers::pi) offset += kTwoPi;
    }
    prev = raw;
    theta[i] = raw + offset;
  }
  return theta;
}

/// Mean time per 2 pi sweep of the separation angle.
double sweep_period(const DenseTrajectory& traj, const std::vector<double>& theta) {
  const double direction = theta.back() >= theta.front() ? 1.0 : -1.0;
  double last_crossing = traj.times.front();
  int turns = 0;
  for (size_t i = 1; i < theta.size(); ++i) {
    const double target = theta.front() + direction * kTwoPi * (turns + 1);
    const double a = direction * (theta[i - 1] - target);
    const double b = direction * (theta[i] - target);
    if (a < 0.0 && b >= 0.0) {
      const double frac = -a / (b - a);
      last_crossing = traj.times[i - 1] + frac * (traj.times[i] - traj.times[i - 1]);
      ++turns;
    }
  }
  return (last_crossing - traj.times.front()) / turns;
}

}  // namespace

OrbitalElements orbital_elements(const DenseTrajectory& traj, std::array<double, 2> masses,
                                 double G) {
  if (traj.size() < 5) throw Error(ErrorCode::insufficient_coverage, "trajectory too short");
  const std::vector<double> theta = unwrapped_angles(traj);
  if (std::abs(theta.back() - theta.front()) < kTwoPi) {
    throw Error(ErrorCode::insufficient_coverage,
                "trajectory covers less than one full orbit (or is unbound)");
  }

  std::vector<double> sep(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) sep[i] = norm(traj.separation_at(i));

  auto refine = [&](size_t i) {
    if (i == 0 || i + 1 >= sep.size()) return Vertex{traj.times[i], sep[i], true};
    const Vertex v = parabola_vertex(traj.times[i - 1], sep[i - 1], traj.times[i], sep[i],
                                     traj.times[i + 1], sep[i + 1]);
    return v.valid ? v : Vertex{traj.times[i], sep[i], true};
  };

  const auto [min_it, max_it] = std::minmax_element(sep.begin(), sep.end());
  OrbitalElements out;
  out.periastron = std::min(*min_it, refine(min_it - sep.begin()).value);
  out.apoastron = std::max(*max_it, refine(max_it - sep.begin()).value);
  out.semi_major = 0.5 * (out.periastron + out.apoastron);
  out.eccentricity = (out.apoastron - out.periastron) / (out.apoastron + out.periastron);

  std::vector<double> passages;
  if (out.eccentricity > 1e-4) {
    for (size_t i = 1; i + 1 < sep.size(); ++i) {
      if (sep[i] < sep[i - 1] && sep[i] <= sep[i + 1]) passages.push_back(refine(i).t);
    }
  }
  if (passages.size() >= 2) {
    out.period = (passages.back() - passages.front()) / static_cast<double>(passages.size() - 1);
  } else {
    out.period = sweep_period(traj, theta);
  }
  const double M = masses[0] + masses[1];
  out.kepler_period = kTwoPi * std::sqrt(out.semi_major * out.semi_major * out.semi_major / (G * M));
  return out;
}

}  // namespace gravbench::sim
