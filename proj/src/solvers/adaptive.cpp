#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>

#include "gravbench/error.hpp"
#include "gravbench/numeric.hpp"
#include "gravbench/solvers/solvers.hpp"

namespace gravbench::solvers {
namespace {

constexpr double kPi = std::numbers::pi;

/// Budget-aware observer that remembers every row it has paid for.
class Prober {
 public:
  Prober(env::ObservationSession& session, int budget)
      : session_(session), budget_(std::min(budget, session.remaining())) {}

  int spent() const { return spent_; }
  int left() const { return budget_ - spent_; }
  bool exhausted() const { return exhausted_; }
  double window_end() const { return session_.window_end(); }
  const std::map<double, ObservationRow>& rows() const { return rows_; }

  double clamp(double t) const { return std::clamp(t, 0.0, window_end()); }

  /// Observes the not-yet-seen times among `times`, clipped to the window.
  /// Requests beyond the budget are dropped and flagged.
  void observe(const std::vector<double>& times) {
    std::vector<double> todo;
    for (double t : times) {
      t = clamp(t);
      if (!rows_.contains(t) && std::find(todo.begin(), todo.end(), t) == todo.end()) {
        todo.push_back(t);
      }
    }
    if (static_cast<int>(todo.size()) > left()) {
      exhausted_ = true;
      todo.resize(static_cast<size_t>(std::max(0, left())));
    }
    const size_t cap = static_cast<size_t>(session_.protocol().per_call_cap);
    for (size_t start = 0; start < todo.size(); start += cap) {
      const auto first = todo.begin() + static_cast<long>(start);
      const auto last = todo.begin() + static_cast<long>(std::min(todo.size(), start + cap));
      try {
        const auto got = session_.observe(std::vector<double>(first, last));
        for (const auto& r : got) rows_[r.time] = r;
        spent_ += static_cast<int>(got.size());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::exhausted) throw;
        exhausted_ = true;
        return;
      }
    }
  }

  const ObservationRow* row(double t) const {
    const auto it = rows_.find(clamp(t));
    return it == rows_.end() ? nullptr : &it->second;
  }

 private:
  env::ObservationSession& session_;
  int budget_;
  int spent_ = 0;
  bool exhausted_ = false;
  std::map<double, ObservationRow> rows_;
};

double separation(const ObservationRow& r) { return sim::norm(r.star2 - r.star1); }

double best_separation_time(const Prober& p) {
  return std::min_element(p.rows().begin(), p.rows().end(), [](const auto& a, const auto& b) {
           return separation(a.second) < separation(b.second);
         })->first;
}

/// Relative Kepler orbit fitted from one position, velocity and acceleration.
struct LocalOrbit {
  double mu = 0.0;
  double e = 0.0;
  double p = 0.0;           // semi-latus rectum
  double period = 0.0;
  double mean_motion = 0.0;
  double periastron_time = 0.0;  // one passage, possibly outside the window
  double passage_timescale = 0.0;
  Vec3 p_hat;  // towards periastron
  Vec3 q_hat;  // direction of motion at periastron
  double h = 0.0;

  /// Relative velocity at true anomaly theta.
  Vec3 velocity(double theta) const {
    return (mu / h) * (-std::sin(theta) * p_hat + (e + std::cos(theta)) * q_hat);
  }
  /// Time after periastron at true anomaly theta in (-pi, pi].
  double time_since_periastron(double theta) const {
    const double E = 2.0 * std::atan(std::sqrt((1.0 - e) / (1.0 + e)) * std::tan(0.5 * theta));
    return (E - e * std::sin(E)) / mean_motion;
  }
};

std::optional<LocalOrbit> fit_local_orbit(const Vec3& r, const Vec3& v, const Vec3& a, double t) {
  const double d = sim::norm(r);
  const double mu = -sim::dot(a, r) * d;  // a = -mu r / d^3
  if (!(mu > 0.0)) return std::nullopt;
  const double energy = 0.5 * sim::dot(v, v) - mu / d;
  if (!(energy < 0.0)) return std::nullopt;
  LocalOrbit o;
  o.mu = mu;
  const Vec3 hv = sim::cross(r, v);
  o.h = sim::norm(hv);
  if (!(o.h > 0.0)) return std::nullopt;
  const Vec3 ev = ((sim::dot(v, v) - mu / d) * r - sim::dot(r, v) * v) / mu;
  o.e = sim::norm(ev);
  if (!(o.e < 1.0)) return std::nullopt;
  const double sma = -mu / (2.0 * energy);
  o.p = o.h * o.h / mu;
  o.mean_motion = std::sqrt(mu / (sma * sma * sma));
  o.period = 2.0 * kPi / o.mean_motion;
  o.p_hat = o.e > 1e-8 ? ev / o.e : r / d;
  o.q_hat = sim::cross(hv / o.h, o.p_hat);
  const double theta = std::atan2(sim::dot(r, o.q_hat), sim::dot(r, o.p_hat));
  o.periastron_time = t - o.time_since_periastron(theta);
  const double rp = sma * (1.0 - o.e);
  o.passage_timescale = std::sqrt(rp * rp * rp / mu);
  return o;
}

struct Stencil {
  double time = 0.0;
  Vec3 r, v, a;        // relative
  Vec3 v1, v_rel;      // star 1 and relative velocity
  bool ok = false;
};

/// Velocity from a tight pair and acceleration from a wider pair around t.
Stencil measure_stencil(Prober& p, double t, double tight, double wide) {
  Stencil s;
  t = std::clamp(t, wide, p.window_end() - wide);
  s.time = t;
  p.observe({t, t - tight, t + tight, t - wide, t + wide});
  const ObservationRow* c = p.row(t);
  const ObservationRow* m1 = p.row(t - tight);
  const ObservationRow* p1 = p.row(t + tight);
  const ObservationRow* m2 = p.row(t - wide);
  const ObservationRow* p2 = p.row(t + wide);
  if (!c || !m1 || !p1 || !m2 || !p2) return s;
  auto rel = [](const ObservationRow* row) { return row->star2 - row->star1; };
  s.r = rel(c);
  s.v_rel = (rel(p1) - rel(m1)) / (p1->time - m1->time);
  s.v1 = (p1->star1 - m1->star1) / (p1->time - m1->time);
  s.v = s.v_rel;
  const double h = 0.5 * (p2->time - m2->time);
  s.a = (rel(p2) - 2.0 * s.r + rel(m2)) / (h * h);
  s.ok = true;
  return s;
}

/// Zooming probe rounds on the separation around `centre`.
void zoom_separation(Prober& p, double centre, double h, int stop_at) {
  p.observe({centre});
  while (stop_at - p.spent() >= 4 && !p.exhausted()) {
    const double c = best_separation_time(p);
    p.observe({c - h, c - 0.5 * h, c + 0.5 * h, c + h});
    h *= 0.5;
  }
}

struct Minimum {
  double time = 0.0;
  double value = 0.0;
  double best_observed = 0.0;
};

Minimum refine_minimum(const Prober& p) {
  Minimum m;
  m.time = best_separation_time(p);
  m.best_observed = separation(p.rows().at(m.time));
  m.value = m.best_observed;
  const auto it = p.rows().find(m.time);
  if (it == p.rows().begin() || std::next(it) == p.rows().end()) return m;
  const auto& [t0, r0] = *std::prev(it);
  const auto& [t2, r2] = *std::next(it);
  const Vertex v = parabola_vertex(t0, separation(r0), m.time, m.best_observed, t2, separation(r2));
  if (v.valid && v.t > t0 && v.t < t2 && v.value <= m.best_observed && v.value > 0.0) {
    m.time = v.t;
    m.value = v.value;
  }
  return m;
}

/// Coarse scan plus a local Kepler fit at the best scan point. Returns the fit
/// (if the stencil gave a bound orbit) and leaves all rows in the prober.
std::optional<LocalOrbit> scan_and_fit(Prober& p, int scan) {
  const double end = p.window_end();
  std::vector<double> times;
  for (int i = 0; i < scan; ++i) times.push_back(end * i / (scan - 1.0));
  p.observe(times);
  const double tb = best_separation_time(p);
  const ObservationRow& row = p.rows().at(tb);
  // Tight pair for velocity; the wide pair is set from the local crossing time.
  const double tight = end * 1e-7;
  p.observe({tb - tight, tb + tight});
  const ObservationRow* lo = p.row(tb - tight);
  const ObservationRow* hi = p.row(tb + tight);
  if (!lo || !hi || lo->time == hi->time) return std::nullopt;
  const Vec3 v = ((hi->star2 - hi->star1) - (lo->star2 - lo->star1)) / (hi->time - lo->time);
  const double crossing = separation(row) / std::max(sim::norm(v), 1e-300);
  const double wide = std::min(0.02 * crossing, 0.05 * end);
  const Stencil s = measure_stencil(p, tb, tight, wide);
  if (!s.ok) return std::nullopt;
  return fit_local_orbit(s.r, s.v, s.a, s.time);
}

/// Periastron passage of `o` nearest to `t` that lies inside the window.
double nearest_passage(const LocalOrbit& o, double t, double end) {
  const double k = std::round((t - o.periastron_time) / o.period);
  double best = o.periastron_time + k * o.period;
  for (double dk : {-1.0, 1.0}) {
    const double c = o.periastron_time + (k + dk) * o.period;
    const bool inside = c >= 0.0 && c <= end;
    const bool best_inside = best >= 0.0 && best <= end;
    if (inside && (!best_inside || std::abs(c - t) < std::abs(best - t))) best = c;
  }
  return std::clamp(best, 0.0, end);
}

}  // namespace

Estimate adaptive_extremum(env::ObservationSession& session, Objective objective, int budget,
                           const sim::UnitSystem& units) {
  if (session.protocol().kind != env::ProtocolKind::budget_obs) {
    throw Error(ErrorCode::protocol, "adaptive search needs a budget_obs session");
  }
  if (budget < 20) throw Error(ErrorCode::validation, "adaptive search needs a budget >= 20");
  Prober p(session, budget);
  const double end = p.window_end();
  Estimate est;

  if (objective == Objective::min_separation) {
    const int scan = std::clamp(budget / 5, 4, 10);
    const auto orbit = scan_and_fit(p, scan);
    double centre = best_separation_time(p);
    double h = end / (scan - 1.0);
    if (orbit) {
      centre = nearest_passage(*orbit, centre, end);
      h = 0.5 * orbit->passage_timescale;
      est.diagnostics["predicted_periastron_time"] = centre;
    }
    zoom_separation(p, centre, h, budget);
    const Minimum m = refine_minimum(p);
    est.value = std::min(m.value, m.best_observed);
    est.unit = units.symbol_for(sim::kLength);
    est.strategy = "adaptive_min_separation";
    est.diagnostics["time"] = m.time;
    est.diagnostics["best_observed"] = m.best_observed;
  } else {
    const int scan = std::clamp(budget / 8, 3, 10);
    const auto orbit = scan_and_fit(p, scan);
    const double tight = end * 1e-7;
    std::vector<std::pair<double, double>> speeds;  // (time, |v1|)
    auto measure = [&](double t) -> std::optional<Stencil> {
      t = std::clamp(t, tight, end - tight);
      p.observe({t - tight, t + tight});
      const ObservationRow* a = p.row(t - tight);
      const ObservationRow* b = p.row(t + tight);
      if (!a || !b) return std::nullopt;
      Stencil s;
      s.time = t;
      s.v1 = (b->star1 - a->star1) / (b->time - a->time);
      s.v_rel = ((b->star2 - b->star1) - (a->star2 - a->star1)) / (b->time - a->time);
      s.ok = true;
      speeds.emplace_back(t, sim::norm(s.v1));
      return s;
    };

    double peak = best_separation_time(p);
    double width = end / (scan - 1.0);
    if (orbit) {
      // Star 1 velocity is V + f v_rel; two velocity samples fix V and f, and
      // the hodograph of v_rel then gives the time of the speed peak.
      const double tb = best_separation_time(p);
      const double tp = nearest_passage(*orbit, tb, end);
      const double t2 = std::abs(tp - tb) > 0.05 * orbit->period
                            ? tp
                            : std::clamp(tp + 0.25 * orbit->period, 0.0, end);
      const auto s1 = measure(tb);
      const auto s2 = measure(t2);
      if (s1 && s2) {
        Eigen::Matrix<double, 6, 4> A = Eigen::Matrix<double, 6, 4>::Zero();
        Eigen::Matrix<double, 6, 1> b;
        const Stencil* ss[2] = {&*s1, &*s2};
        for (int k = 0; k < 2; ++k) {
          const double vr[3] = {ss[k]->v_rel.x, ss[k]->v_rel.y, ss[k]->v_rel.z};
          const double v1[3] = {ss[k]->v1.x, ss[k]->v1.y, ss[k]->v1.z};
          for (int c = 0; c < 3; ++c) {
            A(3 * k + c, c) = 1.0;
            A(3 * k + c, 3) = vr[c];
            b(3 * k + c) = v1[c];
          }
        }
        const Eigen::Vector4d x = A.completeOrthogonalDecomposition().solve(b);
        const Vec3 drift{x(0), x(1), x(2)};
        const double frac = x(3);
        double best_theta = 0.0;
        double best_speed = -1.0;
        for (int i = 0; i < 3600; ++i) {
          const double theta = -kPi + 2.0 * kPi * (i + 0.5) / 3600.0;
          const double sp = sim::norm(drift + frac * orbit->velocity(theta));
          if (sp > best_speed) {
            best_speed = sp;
            best_theta = theta;
          }
        }
        const double tpk = tp + orbit->time_since_periastron(best_theta);
        const double k = std::round((tb - tpk) / orbit->period);
        peak = std::clamp(tpk + k * orbit->period, 0.0, end);
        // Local timescale: passage time near periastron, a slice of the orbit elsewhere.
        const double r_pk = orbit->p / (1.0 + orbit->e * std::cos(best_theta));
        width = std::max(orbit->passage_timescale,
                         0.02 * orbit->period) * std::pow(r_pk * (1.0 - orbit->e) / orbit->p, 1.5);
        est.diagnostics["predicted_peak_time"] = peak;
        est.diagnostics["predicted_peak_speed"] = best_speed;
      }
    }
    measure(peak);
    // Zoom on measured speed around the running best.
    double h = width;
    while (p.left() >= 4 && !p.exhausted()) {
      const auto top = *std::max_element(speeds.begin(), speeds.end(), [](const auto& a, const auto& b) {
        return a.second < b.second;
      });
      measure(top.first - h);
      measure(top.first + h);
      h *= 0.5;
    }
    if (speeds.empty()) throw Error(ErrorCode::exhausted, "no budget left to measure speeds");
    double best = 0.0;
    for (const auto& s : speeds) best = std::max(best, s.second);
    est.value = best;
    est.unit = units.symbol_for(sim::kVelocity);
    est.strategy = "adaptive_max_speed";
    est.diagnostics["speed_samples"] = speeds.size();
  }
  est.observations_spent = p.spent();
  est.exhausted = p.exhausted();
  return est;
}

Estimate plan_gravity_exponent(env::ObservationSession& session, int budget) {
  if (budget < 15) throw Error(ErrorCode::validation, "exponent plan needs a budget >= 15");
  Prober p(session, budget);
  const double end = p.window_end();
  const double h = end / 2000.0;
  const int centres = p.left() / 5;
  std::vector<double> r;
  std::vector<double> a;
  for (int k = 0; k < centres; ++k) {
    const double c = 2.0 * h + (end - 4.0 * h) * (k + 0.5) / centres;
    std::vector<double> times;
    for (int j = -2; j <= 2; ++j) times.push_back(c + j * h);
    p.observe(times);
    std::vector<Vec3> x;
    for (double t : times) {
      const ObservationRow* row = p.row(t);
      if (!row) break;
      x.push_back(row->star2 - row->star1);
    }
    if (x.size() < 5) break;
    const Vec3 acc = (-1.0 * x[0] + 16.0 * x[1] - 30.0 * x[2] + 16.0 * x[3] - 1.0 * x[4]) /
                     (12.0 * h * h);
    r.push_back(sim::norm(x[2]));
    a.push_back(sim::norm(acc));
  }
  const ExponentFit fit = fit_power_law(r, a);
  Estimate est;
  est.value = fit.alpha;
  est.strategy = "planned_stencils";
  est.observations_spent = p.spent();
  est.exhausted = p.exhausted();
  est.diagnostics["stencils"] = r.size();
  est.diagnostics["slope_stderr"] = fit.slope_stderr;
  return est;
}

}  // namespace gravbench::solvers
