#pragma once

#include <array>
#include <string>
#include <string_view>

namespace gravbench::sim {

inline constexpr double kGravitySI = 6.6743e-11;  // m^3 kg^-1 s^-2
inline constexpr double kSolarMass = 1.989e30;    // kg
inline constexpr double kAstronomicalUnit = 1.495978707e11;  // m
inline constexpr double kJulianYear = 365.25 * 86400.0;      // s

/// Physical dimension as integer exponents of (length, time, mass).
struct Dimension {
  int length = 0;
  int time = 0;
  int mass = 0;

  friend constexpr bool operator==(const Dimension&, const Dimension&) = default;
};

inline constexpr Dimension kDimensionless{0, 0, 0};
inline constexpr Dimension kLength{1, 0, 0};
inline constexpr Dimension kTime{0, 1, 0};
inline constexpr Dimension kMass{0, 0, 1};
inline constexpr Dimension kVelocity{1, -1, 0};
inline constexpr Dimension kAcceleration{1, -2, 0};
inline constexpr Dimension kEnergy{2, -2, 1};

std::string to_string(const Dimension& d);

/// A parsed unit expression such as "km/s" or "Msun AU^2 yr^-2".
struct Unit {
  std::string symbol;
  Dimension dimension;
  double to_si = 1.0;  // multiply a value in this unit to obtain SI
};

/// Parses products, quotients and integer powers of the known base symbols
/// (m cm km AU pc, s min h hr day yr, kg g Msun, J erg N). An empty string or
/// "1" is dimensionless. Throws Error{unit} on unknown symbols.
Unit parse_unit(std::string_view text);

/// Converts `value` expressed in `from` into `to`. Throws Error{unit} when the
/// dimensions differ.
double convert(double value, const Unit& from, const Unit& to);

/// Plural English name for a unit symbol ("seconds", "joules"); unknown
/// symbols are returned unchanged.
std::string unit_word(std::string_view symbol);

/// A coherent (length, time, mass) unit system in which a scenario is
/// presented to agents. Simulation always runs in SI.
struct UnitSystem {
  std::string name = "si";
  std::string length_symbol = "m";
  std::string time_symbol = "s";
  std::string mass_symbol = "kg";
  double length_to_si = 1.0;
  double time_to_si = 1.0;
  double mass_to_si = 1.0;

  /// G expressed in this system's units.
  double gravity() const;
  /// SI factor for an arbitrary dimension.
  double to_si(const Dimension& d) const;
  /// Canonical unit string for a dimension ("m/s", "J", "AU", ...).
  std::string symbol_for(const Dimension& d) const;
  /// Human description used in prompts: "seconds and meters".
  std::string prose() const;

  static UnitSystem si();
  static UnitSystem cgs();
  static UnitSystem astro();
  /// Looks up a preset by name; throws Error{unit} for unknown names.
  static UnitSystem named(std::string_view name);
};

}  // namespace gravbench::sim
