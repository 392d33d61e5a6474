#include <algorithm>
#include <cmath>
#include <numbers>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/solvers/solvers.hpp"

namespace gravbench::solvers {
namespace {

using tasks::Measure;

struct Series {
  std::vector<double> t;
  std::vector<double> r;
};

Series separations(std::span<const ObservationRow> rows) {
  Series s;
  for (const auto& row : rows) {
    s.t.push_back(row.time);
    s.r.push_back(sim::norm(row.star2 - row.star1));
  }
  return s;
}

double total_energy(std::span<const ObservationRow> rows, const Masses& m, double G,
                    nlohmann::json& diag) {
  const KinematicSeries k = kinematics(rows);
  std::vector<double> e;
  for (size_t i = 0; i < k.size(); ++i) {
    if (!k.valid[i]) continue;
    const double kin = 0.5 * m.star1 * sim::dot(k.star1_velocity[i], k.star1_velocity[i]) +
                       0.5 * m.star2 * sim::dot(k.star2_velocity[i], k.star2_velocity[i]);
    e.push_back(kin - G * m.star1 * m.star2 / k.separation[i]);
  }
  diag["energy_samples"] = e.size();
  return median(e);
}

double max_speed_star1(std::span<const ObservationRow> rows) {
  const KinematicSeries k = kinematics(rows);
  std::vector<double> t;
  std::vector<double> v;
  for (size_t i = 0; i < k.size(); ++i) {
    if (!k.valid[i]) continue;
    t.push_back(k.times[i]);
    v.push_back(sim::norm(k.star1_velocity[i]));
  }
  return refined_maximum(t, v).value;
}

double mean_distance(std::span<const ObservationRow> rows, double q) {
  std::vector<double> t;
  std::vector<double> d;
  for (const auto& row : rows) {
    const Vec3 com = (row.star1 + q * row.star2) / (1.0 + q);
    t.push_back(row.time);
    d.push_back(sim::norm(row.star1 - com));
  }
  return time_average(t, d);
}

double fraction_accel_below_mean(std::span<const ObservationRow> rows) {
  // |a1| = G m2 / r^2, so the fraction depends on 1/r^2 alone.
  const Series s = separations(rows);
  std::vector<double> y(s.r.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (s.r[i] * s.r[i]);
  return fraction_below(s.t, y, time_average(s.t, y) * (1.0 - 1e-9));
}

double time_20pct_path(std::span<const ObservationRow> rows, double period) {
  std::vector<double> t(rows.size());
  std::vector<double> arc(rows.size(), 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    t[i] = rows[i].time;
    if (i > 0) arc[i] = arc[i - 1] + sim::norm(rows[i].star1 - rows[i - 1].star1);
  }
  const double orbit_end = t.front() + period;
  if (orbit_end > t.back()) {
    throw Error(ErrorCode::insufficient_coverage, "observations shorter than one orbit");
  }
  double orbit_length = 0.0;
  for (size_t i = 1; i < t.size(); ++i) {
    if (t[i] >= orbit_end) {
      const double s = (orbit_end - t[i - 1]) / (t[i] - t[i - 1]);
      orbit_length = arc[i - 1] + s * (arc[i] - arc[i - 1]);
      break;
    }
  }
  return first_crossing(t, arc, 0.2 * orbit_length) - t.front();
}

}  // namespace

nlohmann::json to_json(const Estimate& e) {
  nlohmann::json j{{"unit", e.unit},
                   {"observations_spent", e.observations_spent},
                   {"strategy", e.strategy},
                   {"exhausted", e.exhausted},
                   {"diagnostics", e.diagnostics}};
  if (e.flag) {
    j["value"] = *e.flag;
  } else {
    j["value"] = e.value;
  }
  return j;
}

Estimate solve_rows(const tasks::TaskSpec& task, std::span<const ObservationRow> rows_in,
                    const sim::UnitSystem& units) {
  const std::vector<ObservationRow> rows = prepare(rows_in);
  if (rows.size() < 3) throw Error(ErrorCode::insufficient_coverage, "fewer than 3 observations");
  const double G = units.gravity();
  Estimate est;
  est.unit = units.symbol_for(tasks::dimension_of(task.measure));
  est.strategy = "rows";
  est.diagnostics["rows"] = rows.size();
  const Series sep = separations(rows);
  switch (task.measure) {
    case Measure::period:
      est.value = estimate_period(rows);
      break;
    case Measure::total_mass:
    case Measure::mass_star1:
    case Measure::mass_star2:
    case Measure::total_energy: {
      const Masses m = infer_masses(rows, G);
      est.diagnostics["mass_ratio"] = m.ratio;
      est.diagnostics["semi_major"] = m.semi_major;
      est.diagnostics["period"] = m.period;
      if (task.measure == Measure::total_mass) est.value = m.total;
      if (task.measure == Measure::mass_star1) est.value = m.star1;
      if (task.measure == Measure::mass_star2) est.value = m.star2;
      if (task.measure == Measure::total_energy) {
        est.value = total_energy(rows, m, G, est.diagnostics);
      }
      break;
    }
    case Measure::eccentricity: {
      const double lo = refined_minimum(sep.t, sep.r).value;
      const double hi = refined_maximum(sep.t, sep.r).value;
      est.value = (hi - lo) / (hi + lo);
      break;
    }
    case Measure::periastron:
      est.value = refined_minimum(sep.t, sep.r).value;
      break;
    case Measure::apoastron:
      est.value = refined_maximum(sep.t, sep.r).value;
      break;
    case Measure::max_speed_star1:
      est.value = max_speed_star1(rows);
      break;
    case Measure::mean_distance_star1_com: {
      const Masses m = infer_masses(rows, G);
      est.diagnostics["mass_ratio"] = m.ratio;
      est.value = mean_distance(rows, m.ratio);
      break;
    }
    case Measure::fraction_accel_below_mean:
      est.value = fraction_accel_below_mean(rows);
      break;
    case Measure::time_20pct_path:
      est.value = time_20pct_path(rows, estimate_period(rows));
      break;
    case Measure::drag_timescale: {
      const DragFit fit = fit_drag_timescale(rows);
      est.value = fit.tau;
      est.diagnostics["inverse_tau_stderr"] = fit.inverse_tau_stderr;
      break;
    }
    case Measure::gravity_exponent: {
      const ExponentFit fit = fit_gravity_exponent(rows);
      est.value = fit.alpha;
      est.diagnostics["slope_stderr"] = fit.slope_stderr;
      est.diagnostics["r_squared"] = fit.r_squared;
      break;
    }
    case Measure::is_bound: {
      const BoundFit fit = fit_bound(rows);
      est.flag = fit.bound;
      est.value = fit.bound ? 1.0 : 0.0;
      est.diagnostics["gm"] = fit.gm;
      est.diagnostics["specific_energy"] = fit.specific_energy;
      break;
    }
  }
  if (!std::isfinite(est.value)) {
    throw Error(ErrorCode::conditioning, "solver produced a non-finite estimate");
  }
  return est;
}

Estimate solve_full(const tasks::TaskSpec& task, env::ObservationSession& session,
                    const sim::UnitSystem& units) {
  const auto rows = session.full_table();
  Estimate est = solve_rows(task, rows, units);
  est.strategy = "full";
  return est;
}

Estimate solve_uniform(const tasks::TaskSpec& task, env::ObservationSession& session, int n,
                       const sim::UnitSystem& units) {
  if (n < 3) throw Error(ErrorCode::validation, "uniform sampling needs N >= 3");
  const double end = session.window_end();
  const int cap = session.protocol().per_call_cap;
  std::vector<ObservationRow> rows;
  for (int start = 0; start < n; start += cap) {
    std::vector<double> times;
    for (int i = start; i < std::min(n, start + cap); ++i) {
      times.push_back(std::min(end, end * static_cast<double>(i) / static_cast<double>(n - 1)));
    }
    const auto got = session.observe(times);
    rows.insert(rows.end(), got.begin(), got.end());
  }
  Estimate est = solve_rows(task, rows, units);
  est.observations_spent = n;
  est.strategy = "uniform_" + std::to_string(n);
  return est;
}

Estimate solve_budgeted(const tasks::TaskSpec& task, env::ObservationSession& session,
                        const sim::UnitSystem& units) {
  const int budget = session.remaining();
  switch (task.measure) {
    case Measure::periastron:
      if (budget >= 20) return adaptive_extremum(session, Objective::min_separation, budget, units);
      break;
    case Measure::max_speed_star1:
      if (budget >= 20) return adaptive_extremum(session, Objective::max_speed, budget, units);
      break;
    case Measure::gravity_exponent:
      if (budget >= 15) {
        Estimate e = plan_gravity_exponent(session, std::min(budget, 70));
        e.unit = units.symbol_for(sim::kDimensionless);
        return e;
      }
      break;
    default:
      break;
  }
  return solve_uniform(task, session, budget, units);
}

}  // namespace gravbench::solvers
