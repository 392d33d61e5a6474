#pragma once

#include "gravbench/sim/dynamics.hpp"

namespace gravbench::sim {

/// Fixed-step symplectic step for Newtonian gravity: the centre of mass drifts
/// exactly and the relative orbit follows the exact Kepler flow. Advances by
/// exactly `dt` (negative steps run backwards). Throws
/// Error{contract_violation} for any non-Newtonian law.
BodyPair step_fixed(const BodyPair& state, double dt, const ForceLaw& law, double G = kGravitySI);

/// Kick-drift-kick leapfrog. Second order, symplectic, reversible; kept as a
/// reference scheme, step_fixed is what simulate() uses.
BodyPair leapfrog_step(const BodyPair& state, double dt, const ForceLaw& law, double G = kGravitySI);

struct AdaptiveStep {
  BodyPair state;
  double dt_used = 0.0;
  double dt_next = 0.0;
  double error = 0.0;  // accepted local error estimate, in units of tol
};

/// One accepted step of the embedded Runge-Kutta-Fehlberg 7(8) pair with a
/// proportional-integral controller. `dt_try` is the first trial step; the
/// step is retried with smaller dt until the local error estimate (position
/// error relative to the separation, velocity error relative to the relative
/// speed) is below `tol`. `prev_error` feeds the integral term.
/// Throws Error{validation} for tol outside (1e-14, 1e-6) and
/// Error{singularity_approach} when dt underflows.
AdaptiveStep step_adaptive(const BodyPair& state, double tol, const ForceLaw& law, double dt_try,
                           double prev_error = 1.0, double G = kGravitySI);

}  // namespace gravbench::sim
