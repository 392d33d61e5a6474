#pragma once

#include "gravbench/sim/dynamics.hpp"

namespace gravbench::sim {

/// Advances a relative two-body state by `dt` (either sign) under the exact
/// Keplerian flow, using universal variables so elliptic, parabolic and
/// hyperbolic orbits share one code path.
RelativeState propagate_kepler(const RelativeState& state, double mu, double dt);

}  // namespace gravbench::sim
