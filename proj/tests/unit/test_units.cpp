#include <doctest.h>

#include <cmath>

#include "gravbench/error.hpp"
#include "gravbench/sim/units.hpp"

using namespace gravbench;
using namespace gravbench::sim;

TEST_CASE("unit expressions parse into SI factors and dimensions") {
  const Unit kms = parse_unit("km/s");
  CHECK(kms.dimension == kVelocity);
  CHECK(kms.to_si == doctest::Approx(1e3));

  const Unit joule_long = parse_unit("kg m^2 s^-2");
  CHECK(joule_long.dimension == kEnergy);
  CHECK(joule_long.to_si == doctest::Approx(1.0));

  const Unit python_style = parse_unit("kg*m**2/s**2");
  CHECK(python_style.dimension == kEnergy);

  CHECK(parse_unit("").dimension == kDimensionless);
  CHECK(parse_unit("1").dimension == kDimensionless);
  CHECK(parse_unit("Msun AU^2/yr^2").dimension == kEnergy);
}

TEST_CASE("conversion between compatible units") {
  CHECK(convert(1.5, parse_unit("km"), parse_unit("m")) == doctest::Approx(1500.0));
  CHECK(convert(1.0, parse_unit("erg"), parse_unit("J")) == doctest::Approx(1e-7));
  CHECK(convert(1.0, parse_unit("AU"), parse_unit("cm")) == doctest::Approx(1.495978707e13));
}

TEST_CASE("bad unit expressions are rejected") {
  CHECK_THROWS_AS(parse_unit("furlong"), Error);
  CHECK_THROWS_AS(parse_unit("m^"), Error);
  CHECK_THROWS_AS(convert(1.0, parse_unit("m"), parse_unit("s")), Error);
  try {
    convert(1.0, parse_unit("kg"), parse_unit("m/s"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unit);
  }
}

TEST_CASE("every preset unit system gives G = 6.674e-11 in SI within 0.1%") {
  for (const auto& units : {UnitSystem::si(), UnitSystem::cgs(), UnitSystem::astro()}) {
    CAPTURE(units.name);
    CHECK(units.length_to_si > 0.0);
    CHECK(units.time_to_si > 0.0);
    CHECK(units.mass_to_si > 0.0);
    const double g_si = units.gravity() * units.to_si(Dimension{3, -2, -1});
    CHECK(std::abs(g_si - 6.674e-11) / 6.674e-11 < 1e-3);
  }
  // Familiar value: G ~ 4 pi^2 AU^3 / (Msun yr^2).
  CHECK(UnitSystem::astro().gravity() == doctest::Approx(39.42).epsilon(2e-3));
}

TEST_CASE("unit symbols for dimensions round-trip through the parser") {
  for (const auto& units : {UnitSystem::si(), UnitSystem::cgs(), UnitSystem::astro()}) {
    for (const Dimension& d : {kLength, kTime, kMass, kVelocity, kEnergy, kAcceleration}) {
      const Unit u = parse_unit(units.symbol_for(d));
      CAPTURE(units.symbol_for(d));
      CHECK(u.dimension == d);
      CHECK(u.to_si == doctest::Approx(units.to_si(d)).epsilon(1e-12));
    }
  }
  CHECK(UnitSystem::si().symbol_for(kVelocity) == "m/s");
  CHECK(UnitSystem::si().symbol_for(kEnergy) == "J");
  CHECK(UnitSystem::named("astro").length_symbol == "AU");
  CHECK_THROWS_AS(UnitSystem::named("imperial"), Error);
}
