#pragma once

#include <array>

#include "gravbench/sim/vec3.hpp"

namespace gravbench::sim {

struct BodyState {
  double mass = 0.0;  // kg
  Vec3 position;      // m
  Vec3 velocity;      // m/s
};

using BodyPair = std::array<BodyState, 2>;
using VecPair = std::array<Vec3, 2>;

/// Throws Error{validation} for non-positive masses or non-finite components.
void validate(const BodyPair& bodies);

inline double total_mass(const BodyPair& b) { return b[0].mass + b[1].mass; }

inline Vec3 center_of_mass(const BodyPair& b) {
  return (b[0].mass * b[0].position + b[1].mass * b[1].position) / total_mass(b);
}

inline Vec3 center_of_mass_velocity(const BodyPair& b) {
  return (b[0].mass * b[0].velocity + b[1].mass * b[1].velocity) / total_mass(b);
}

inline Vec3 momentum(const BodyPair& b) {
  return b[0].mass * b[0].velocity + b[1].mass * b[1].velocity;
}

/// Separation vector r2 - r1 and its rate.
inline Vec3 separation(const BodyPair& b) { return b[1].position - b[0].position; }
inline Vec3 relative_velocity(const BodyPair& b) { return b[1].velocity - b[0].velocity; }

}  // namespace gravbench::sim
