#include "gravbench/sim/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "gravbench/error.hpp"
#include "gravbench/sim/kepler.hpp"

namespace gravbench::sim {
namespace {

using Flat = std::array<double, 12>;

Flat flatten(const BodyPair& b) {
  return {b[0].position.x, b[0].position.y, b[0].position.z, b[1].position.x,
          b[1].position.y, b[1].position.z, b[0].velocity.x, b[0].velocity.y,
          b[0].velocity.z, b[1].velocity.x, b[1].velocity.y, b[1].velocity.z};
}

BodyPair unflatten(const Flat& f, const BodyPair& masses_from) {
  return {BodyState{masses_from[0].mass, {f[0], f[1], f[2]}, {f[6], f[7], f[8]}},
          BodyState{masses_from[1].mass, {f[3], f[4], f[5]}, {f[9], f[10], f[11]}}};
}

struct Rhs {
  const BodyPair& masses;
  const ForceLaw& law;
  double G;

  void operator()(const Flat& x, Flat& dxdt, double /*t*/) const {
    const BodyPair b = unflatten(x, masses);
    const VecPair a = accelerations(b, law, G);
    dxdt = {x[6], x[7], x[8], x[9], x[10], x[11],
            a[0].x, a[0].y, a[0].z, a[1].x, a[1].y, a[1].z};
  }
};

bool all_finite(const Flat& f) {
  return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); });
}

/// Local error in units of tol: positions against the separation, velocities
/// against the relative speed (floored at the circular speed).
double scaled_error(const Flat& err, const BodyPair& state, double tol, double G) {
  const double d = norm(separation(state));
  const double v_circ = std::sqrt(G * total_mass(state) / d);
  const double v_scale = std::max(norm(relative_velocity(state)), v_circ);
  double worst = 0.0;
  for (int body = 0; body < 2; ++body) {
    const Vec3 dp{err[3 * body], err[3 * body + 1], err[3 * body + 2]};
    const Vec3 dv{err[6 + 3 * body], err[7 + 3 * body], err[8 + 3 * body]};
    worst = std::max({worst, norm(dp) / d, norm(dv) / v_scale});
  }
  return worst / tol;
}

}  // namespace

BodyPair step_fixed(const BodyPair& state, double dt, const ForceLaw& law, double G) {
  if (!is_newtonian(law)) {
    throw Error(ErrorCode::contract_violation,
                "step_fixed requires a Newtonian force law, got " + describe(law));
  }
  validate(state);
  const double m1 = state[0].mass;
  const double m2 = state[1].mass;
  const double M = m1 + m2;
  const Vec3 com = center_of_mass(state);
  const Vec3 com_v = center_of_mass_velocity(state);
  const RelativeState rel =
      propagate_kepler({separation(state), relative_velocity(state)}, G * M, dt);
  const Vec3 com_next = com + com_v * dt;
  return {
      BodyState{m1, com_next - (m2 / M) * rel.position, com_v - (m2 / M) * rel.velocity},
      BodyState{m2, com_next + (m1 / M) * rel.position, com_v + (m1 / M) * rel.velocity},
  };
}

BodyPair leapfrog_step(const BodyPair& state, double dt, const ForceLaw& law, double G) {
  if (!is_conservative(law)) {
    throw Error(ErrorCode::contract_violation, "leapfrog requires a conservative force law");
  }
  BodyPair s = state;
  VecPair a = accelerations(s, law, G);
  for (int i = 0; i < 2; ++i) s[i].velocity += a[i] * (0.5 * dt);
  for (int i = 0; i < 2; ++i) s[i].position += s[i].velocity * dt;
  a = accelerations(s, law, G);
  for (int i = 0; i < 2; ++i) s[i].velocity += a[i] * (0.5 * dt);
  return s;
}

AdaptiveStep step_adaptive(const BodyPair& state, double tol, const ForceLaw& law, double dt_try,
                           double prev_error, double G) {
  if (!(tol > 1e-14 && tol < 1e-6)) {
    throw Error(ErrorCode::validation, "adaptive tolerance must lie in (1e-14, 1e-6)");
  }
  if (!(dt_try > 0.0) || !std::isfinite(dt_try)) {
    throw Error(ErrorCode::validation, "adaptive trial step must be positive");
  }
  validate(law);
  validate(state);

  // Order-7 error estimate of the 8th-order solution.
  constexpr double kExponent = 1.0 / 8.0;
  constexpr double kSafety = 0.9;
  constexpr double kMinFactor = 0.2;
  constexpr double kMaxFactor = 5.0;

  boost::numeric::odeint::runge_kutta_fehlberg78<Flat> stepper;
  const Rhs rhs{state, law, G};
  const Flat x = flatten(state);
  const double d = norm(separation(state));
  const double dynamical_time = std::sqrt(d * d * d / (G * total_mass(state)));

  double dt = dt_try;
  for (int attempt = 0; attempt < 200; ++attempt) {
    if (dt < 1e-12 * dynamical_time) {
      throw Error(ErrorCode::singularity_approach,
                  "adaptive step underflow near close approach (separation " + std::to_string(d) +
                      " m)");
    }
    Flat out{};
    Flat err{};
    bool ok = true;
    try {
      stepper.do_step(rhs, x, 0.0, out, dt, err);
      ok = all_finite(out) && all_finite(err);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::singularity && e.code() != ErrorCode::validation) throw;
      ok = false;
    }
    if (!ok) {
      dt *= kMinFactor;
      continue;
    }
    const double e = scaled_error(err, state, tol, G);
    if (e <= 1.0) {
      double factor = kMaxFactor;
      if (e > 0.0) {
        // PI control (Gustafsson): proportional on e, integral on the previous error.
        factor = kSafety * std::pow(e, -0.7 * kExponent) *
                 std::pow(std::max(prev_error, 1e-4), 0.4 * kExponent);
      }
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      return {unflatten(out, state), dt, dt * factor, e};
    }
    dt *= std::max(kMinFactor, kSafety * std::pow(e, -kExponent));
  }
  throw Error(ErrorCode::singularity_approach, "adaptive step rejected repeatedly");
}

}  // namespace gravbench::sim
