#pragma once

#include <string_view>
#include <vector>

#include "gravbench/sim/scenario.hpp"

namespace gravbench::sim {

/// The sixteen built-in scenarios: standard, circular, eccentric, a single
/// highly elliptical orbit, unbound, proper motion, displaced COM, unequal
/// masses, three modified-gravity, three drag, and two unit-system variants.
const std::vector<Scenario>& scenario_library();

/// Throws Error{not_found}.
const Scenario& find_scenario(std::string_view id);

}  // namespace gravbench::sim
