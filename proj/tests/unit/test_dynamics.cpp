#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gravbench/error.hpp"
#include "gravbench/sim/dynamics.hpp"
#include "gravbench/sim/integrators.hpp"
#include "gravbench/sim/kepler.hpp"
#include "gravbench/sim/scenario.hpp"

using namespace gravbench;
using namespace gravbench::sim;

namespace {

constexpr double AU = kAstronomicalUnit;
constexpr double Msun = kSolarMass;

BodyPair random_bound_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mass(0.2, 3.0);
  std::uniform_real_distribution<double> ecc(0.0, 0.8);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> axis(0.5, 5.0);
  BodyPair s = keplerian_pair(mass(rng) * Msun, mass(rng) * Msun, axis(rng) * AU, ecc(rng),
                              angle(rng), angle(rng));
  const Vec3 drift{1e4 * std::cos(angle(rng)), 1e4 * std::sin(angle(rng)), 0.0};
  for (auto& b : s) {
    b.position += Vec3{AU, -2.0 * AU, 0.0};
    b.velocity += drift;
  }
  return s;
}

double rel_diff(const Vec3& a, const Vec3& b, double scale) { return norm(a - b) / scale; }

}  // namespace

TEST_CASE("accelerations: equal masses on the x-axis pull symmetrically") {
  const BodyPair s{BodyState{Msun, {-AU, 0, 0}, {}}, BodyState{Msun, {AU, 0, 0}, {}}};
  const VecPair a = accelerations(s, Newtonian{});
  CHECK(a[0].x > 0.0);
  CHECK(a[0].x == -a[1].x);
  CHECK(a[0].y == 0.0);
  CHECK(a[1].z == 0.0);
}

TEST_CASE("accelerations: hand-evaluated Newtonian magnitude") {
  const double m = 1.989e30;
  const double r = 1.496e11;
  const BodyPair s{BodyState{m, {0, 0, 0}, {}}, BodyState{m, {r, 0, 0}, {}}};
  const VecPair a = accelerations(s, Newtonian{});
  // G m2 / r^2 = 6.6743e-11 * 1.989e30 / 1.496e11^2
  const double expected = 6.6743e-11 * 1.989e30 / (1.496e11 * 1.496e11);
  CHECK(norm(a[0]) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(norm(a[0]) == doctest::Approx(5.93e-3).epsilon(2e-3));
}

TEST_CASE("accelerations: alpha = 0 reproduces Newtonian bit-for-bit") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const BodyPair s = random_bound_state(rng);
    const double r0 = norm(separation(s)) * 1.7;
    const VecPair newton = accelerations(s, Newtonian{});
    const VecPair modified = accelerations(s, ModifiedGravity{0.0, r0});
    CHECK(newton[0] == modified[0]);
    CHECK(newton[1] == modified[1]);
  }
}

TEST_CASE("accelerations: gravity conserves momentum, drag opposes velocity") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const BodyPair s = random_bound_state(rng);
    for (const ForceLaw& law : {ForceLaw{Newtonian{}}, ForceLaw{ModifiedGravity{0.05, AU}}}) {
      const VecPair a = accelerations(s, law);
      const Vec3 net = s[0].mass * a[0] + s[1].mass * a[1];
      CHECK(norm(net) <= 1e-14 * s[0].mass * norm(a[0]));
    }
    const double tau = 1e9;
    const VecPair with_drag = accelerations(s, LinearDrag{tau});
    const VecPair without = accelerations(s, Newtonian{});
    for (int b = 0; b < 2; ++b) {
      const Vec3 drag = with_drag[b] - without[b];
      CHECK(dot(drag, s[b].velocity) < 0.0);
      CHECK(norm(cross(drag, s[b].velocity)) <= 1e-6 * norm(drag) * norm(s[b].velocity));
      CHECK(norm(drag) == doctest::Approx(norm(s[b].velocity) / tau).epsilon(1e-9));
    }
  }
}

TEST_CASE("accelerations: invalid inputs") {
  BodyPair s{BodyState{Msun, {AU, 0, 0}, {}}, BodyState{Msun, {AU, 0, 0}, {}}};
  try {
    accelerations(s, Newtonian{});
    FAIL("expected a singularity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singularity);
  }
  s[1].position.x = std::nan("");
  try {
    accelerations(s, Newtonian{});
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
  }
  CHECK_THROWS_AS(validate(ForceLaw{ModifiedGravity{1.0, AU}}), Error);
  CHECK_THROWS_AS(validate(ForceLaw{LinearDrag{-1.0}}), Error);
}

TEST_CASE("total_energy: circular closed form and velocity scaling") {
  const BodyPair circ = keplerian_pair(1.989e30, 1.989e30, 1.496e11, 0.0);
  const double expected = -6.6743e-11 * 1.989e30 * 1.989e30 / (2.0 * 1.496e11);
  CHECK(total_energy(circ, Newtonian{}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(total_energy(circ, Newtonian{}) == doctest::Approx(-8.82e38).epsilon(1e-3));

  BodyPair fast = circ;
  for (auto& b : fast) b.velocity *= 2.0;
  BodyPair still = circ;
  for (auto& b : still) b.velocity = {};
  const double U = total_energy(still, Newtonian{});
  const double K = total_energy(circ, Newtonian{}) - U;
  CHECK(total_energy(fast, Newtonian{}) - U == doctest::Approx(4.0 * K).epsilon(1e-12));
  // Drag uses the Newtonian potential without complaint.
  CHECK(total_energy(circ, LinearDrag{1e8}) == total_energy(circ, Newtonian{}));
}

TEST_CASE("total_energy: modified-gravity potential is the antiderivative of the force") {
  const double alpha = 0.07;
  const double r0 = 1.3 * AU;
  const ModifiedGravity law{alpha, r0};
  BodyPair s{BodyState{Msun, {0, 0, 0}, {}}, BodyState{0.6 * Msun, {AU, 0, 0}, {}}};
  const double h = 1e-4 * AU;
  BodyPair plus = s;
  BodyPair minus = s;
  plus[1].position.x += h;
  minus[1].position.x -= h;
  const double dU_dr = (total_energy(plus, law) - total_energy(minus, law)) / (2.0 * h);
  const double force_on_2 = s[1].mass * accelerations(s, law)[1].x;
  CHECK(-dU_dr == doctest::Approx(force_on_2).epsilon(1e-7));
}

TEST_CASE("osculating orbit of a constructed ellipse") {
  const BodyPair s = keplerian_pair(1.5 * Msun, 0.5 * Msun, 2.0 * AU, 0.6, 1.1, 0.4);
  const OsculatingOrbit o = osculating_orbit(s);
  CHECK(o.bound);
  CHECK(o.semi_major == doctest::Approx(2.0 * AU).epsilon(1e-12));
  CHECK(o.eccentricity == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(o.periastron == doctest::Approx(0.8 * AU).epsilon(1e-12));
  CHECK(o.period == doctest::Approx(2.0 * std::numbers::pi *
                                    std::sqrt(std::pow(2.0 * AU, 3) / (kGravitySI * 2.0 * Msun)))
                        .epsilon(1e-12));
}

TEST_CASE("Kepler propagation agrees with the Kepler-equation solution") {
  // Independent route: kepler_state solves E - e sin E = M directly.
  const double mu = kGravitySI * 2.0 * Msun;
  const double a = 1.7 * AU;
  const double n = std::sqrt(mu / (a * a * a));
  for (double e : {0.0, 0.3, 0.7, 0.95}) {
    for (double M0 : {0.0, 1.0, 4.0}) {
      const RelativeState start = kepler_state(mu, a, e, M0);
      for (double dt_frac : {1e-4, 0.013, 0.37, 1.6, -0.45}) {
        const double dt = dt_frac * 2.0 * std::numbers::pi / n;
        const RelativeState got = propagate_kepler(start, mu, dt);
        const RelativeState want = kepler_state(mu, a, e, M0 + n * dt);
        CAPTURE(e);
        CAPTURE(M0);
        CAPTURE(dt_frac);
        CHECK(rel_diff(got.position, want.position, a) < 1e-10);
        CHECK(rel_diff(got.velocity, want.velocity, norm(want.velocity)) < 1e-9);
      }
    }
  }
}

TEST_CASE("Kepler propagation of hyperbolic orbits conserves energy and angular momentum") {
  const double mu = kGravitySI * 2.0 * Msun;
  const RelativeState start{{2.0 * AU, 0, 0}, {-1e4, 4.5e4, 0}};
  const double energy0 = 0.5 * dot(start.velocity, start.velocity) - mu / norm(start.position);
  REQUIRE(energy0 > 0.0);
  const Vec3 h0 = cross(start.position, start.velocity);
  for (double dt : {1e5, 1e7, 3e8, -2e7}) {
    const RelativeState s = propagate_kepler(start, mu, dt);
    const double energy = 0.5 * dot(s.velocity, s.velocity) - mu / norm(s.position);
    CHECK(energy == doctest::Approx(energy0).epsilon(1e-10));
    CHECK(norm(cross(s.position, s.velocity) - h0) <= 1e-10 * norm(h0));
    const RelativeState back = propagate_kepler(s, mu, -dt);
    CHECK(rel_diff(back.position, start.position, norm(start.position)) < 1e-9);
  }
}

TEST_CASE("step_fixed: twin stars released from rest fall straight in") {
  const BodyPair s{BodyState{Msun, {-AU, 0, 0}, {}}, BodyState{Msun, {AU, 0, 0}, {}}};
  const BodyPair next = step_fixed(s, 1e3, Newtonian{});
  CHECK(next[0].position.x > -AU);
  CHECK(next[0].position.x == doctest::Approx(-next[1].position.x).epsilon(1e-15));
  CHECK(std::abs(next[0].position.y) < 1e-6);
  CHECK(next[0].velocity.x == doctest::Approx(-next[1].velocity.x).epsilon(1e-12));
}

TEST_CASE("step_fixed: circular orbit returns to its start after 5000 steps of T/5000") {
  const double r = AU;
  const BodyPair s = keplerian_pair(Msun, Msun, r, 0.0);
  const double T = 2.0 * std::numbers::pi * std::sqrt(r * r * r / (kGravitySI * 2.0 * Msun));
  BodyPair cur = s;
  for (int i = 0; i < 5000; ++i) cur = step_fixed(cur, T / 5000.0, Newtonian{});
  CHECK(rel_diff(cur[0].position, s[0].position, r) < 1e-6);
  CHECK(rel_diff(cur[1].position, s[1].position, r) < 1e-6);
}

TEST_CASE("step_fixed: reversible to 1e-12 from random bound states") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const BodyPair s = random_bound_state(rng);
    const double T = osculating_orbit(s).period;
    const double dt = T / 5000.0;
    const BodyPair back = step_fixed(step_fixed(s, dt, Newtonian{}), -dt, Newtonian{});
    const double scale = norm(s[0].position) + norm(separation(s));
    for (int b = 0; b < 2; ++b) {
      CHECK(rel_diff(back[b].position, s[b].position, scale) < 1e-12);
      CHECK(rel_diff(back[b].velocity, s[b].velocity, norm(s[b].velocity)) < 1e-12);
    }
  }
}

TEST_CASE("step_fixed rejects non-conservative and modified laws") {
  const BodyPair s = keplerian_pair(Msun, Msun, AU, 0.0);
  try {
    step_fixed(s, 10.0, LinearDrag{1e8});
    FAIL("expected contract violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::contract_violation);
  }
  CHECK_THROWS_AS(step_fixed(s, 10.0, ModifiedGravity{0.03, AU}), Error);
}

TEST_CASE("leapfrog at T/5000 drifts far more than the Kepler split") {
  const BodyPair s = keplerian_pair(Msun, 0.5 * Msun, AU, 0.5, 0.0);
  const double T = osculating_orbit(s).period;
  const double e0 = total_energy(s, Newtonian{});
  BodyPair lf = s;
  BodyPair ks = s;
  double worst_lf = 0.0;
  double worst_ks = 0.0;
  for (int i = 0; i < 5000; ++i) {
    lf = leapfrog_step(lf, T / 5000.0, Newtonian{});
    ks = step_fixed(ks, T / 5000.0, Newtonian{});
    worst_lf = std::max(worst_lf, std::abs(total_energy(lf, Newtonian{}) / e0 - 1.0));
    worst_ks = std::max(worst_ks, std::abs(total_energy(ks, Newtonian{}) / e0 - 1.0));
  }
  CHECK(worst_lf > 1e-8);
  CHECK(worst_ks < 1e-12);
}

TEST_CASE("step_adaptive: circular orbit at tol 1e-12 conserves energy to 1e-10 over an orbit") {
  const BodyPair s = keplerian_pair(Msun, Msun, AU, 0.0);
  const double T = osculating_orbit(s).period;
  const double e0 = total_energy(s, Newtonian{});
  BodyPair cur = s;
  double t = 0.0;
  double dt = T / 100.0;
  double prev = 1.0;
  int steps = 0;
  while (t < T) {
    const AdaptiveStep step = step_adaptive(cur, 1e-12, ModifiedGravity{0.0, AU}, std::min(dt, T - t), prev);
    CHECK(step.dt_used > 0.0);
    CHECK(step.error <= 1.0);
    cur = step.state;
    t += step.dt_used;
    dt = step.dt_next;
    prev = std::max(step.error, 1e-4);
    ++steps;
  }
  CHECK(std::abs(total_energy(cur, Newtonian{}) / e0 - 1.0) <= 1e-10);
  MESSAGE("adaptive steps per orbit: " << steps);
}

TEST_CASE("step_adaptive: drag makes the energy fall at every step") {
  const BodyPair s = keplerian_pair(Msun, 0.8 * Msun, 2.0 * AU, 0.3);
  const double T = osculating_orbit(s).period;
  const LinearDrag law{50.0 * T};
  BodyPair cur = s;
  double e_prev = total_energy(cur, law);
  double dt = T / 200.0;
  for (int i = 0; i < 300; ++i) {
    const AdaptiveStep step = step_adaptive(cur, 1e-12, law, dt);
    cur = step.state;
    dt = step.dt_next;
    const double e = total_energy(cur, law);
    CHECK(e < e_prev);
    e_prev = e;
  }
}

TEST_CASE("step_adaptive: argument checks and singularity approach") {
  const BodyPair s = keplerian_pair(Msun, Msun, AU, 0.0);
  CHECK_THROWS_AS(step_adaptive(s, 1e-3, Newtonian{}, 10.0), Error);
  CHECK_THROWS_AS(step_adaptive(s, 1e-16, Newtonian{}, 10.0), Error);
  // Head-on collision: stepping across r = 0 cannot meet the tolerance.
  BodyPair head_on{BodyState{Msun, {-1e3, 0, 0}, {3e5, 0, 0}},
                   BodyState{Msun, {1e3, 0, 0}, {-3e5, 0, 0}}};
  try {
    BodyPair cur = head_on;
    double dt = 1e-3;
    for (int i = 0; i < 100000; ++i) {
      const AdaptiveStep step = step_adaptive(cur, 1e-12, Newtonian{}, dt);
      cur = step.state;
      dt = step.dt_next;
    }
    FAIL("expected the step size to underflow");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::singularity_approach || e.code() == ErrorCode::singularity));
  }
}
