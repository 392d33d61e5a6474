#pragma once

#include <string>
#include <variant>

namespace gravbench::sim {

struct Newtonian {};

/// F = G m1 m2 r0^alpha / r^(2+alpha). `reference_separation` (r0) keeps G in
/// SI units; simulate() fills it with the initial separation when left at 0.
struct ModifiedGravity {
  double alpha = 0.0;
  double reference_separation = 0.0;
};

/// Extra per-body acceleration -v/tau.
struct LinearDrag {
  double tau = 0.0;
};

using ForceLaw = std::variant<Newtonian, ModifiedGravity, LinearDrag>;

inline bool is_newtonian(const ForceLaw& law) { return std::holds_alternative<Newtonian>(law); }
inline bool is_conservative(const ForceLaw& law) { return !std::holds_alternative<LinearDrag>(law); }

std::string describe(const ForceLaw& law);

/// Throws Error{validation} when alpha is outside (-1, 1) or tau <= 0.
void validate(const ForceLaw& law);

}  // namespace gravbench::sim
