#include "gravbench/sim/units.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "gravbench/error.hpp"

namespace gravbench::sim {
namespace {

struct BaseUnit {
  Dimension dimension;
  double to_si;
};

const std::map<std::string, BaseUnit, std::less<>>& base_units() {
  static const std::map<std::string, BaseUnit, std::less<>> table = {
      {"m", {kLength, 1.0}},
      {"cm", {kLength, 1e-2}},
      {"km", {kLength, 1e3}},
      {"AU", {kLength, kAstronomicalUnit}},
      {"au", {kLength, kAstronomicalUnit}},
      {"pc", {kLength, 3.0856775814913673e16}},
      {"s", {kTime, 1.0}},
      {"min", {kTime, 60.0}},
      {"h", {kTime, 3600.0}},
      {"hr", {kTime, 3600.0}},
      {"day", {kTime, 86400.0}},
      {"d", {kTime, 86400.0}},
      {"yr", {kTime, kJulianYear}},
      {"year", {kTime, kJulianYear}},
      {"kg", {kMass, 1.0}},
      {"g", {kMass, 1e-3}},
      {"Msun", {kMass, kSolarMass}},
      {"M_sun", {kMass, kSolarMass}},
      {"J", {kEnergy, 1.0}},
      {"erg", {kEnergy, 1e-7}},
      {"N", {Dimension{1, -2, 1}, 1.0}},
  };
  return table;
}

Dimension scaled(const Dimension& d, int power) {
  return {d.length * power, d.time * power, d.mass * power};
}

Dimension combined(const Dimension& a, const Dimension& b) {
  return {a.length + b.length, a.time + b.time, a.mass + b.mass};
}

class UnitParser {
 public:
  explicit UnitParser(std::string_view text) : text_(text) {}

  Unit parse() {
    Unit out{std::string(trimmed()), kDimensionless, 1.0};
    skip_space();
    if (at_end()) return out;
    if (text_.substr(pos_) == "1" || text_.substr(pos_) == "dimensionless") return out;

    int sign = 1;
    bool first = true;
    while (true) {
      skip_space();
      if (at_end()) break;
      if (!first) {
        if (peek() == '/') {
          sign = -1;
          ++pos_;
        } else if (peek() == '*' && !starts_with("**")) {
          sign = 1;
          ++pos_;
        } else {
          sign = 1;  // juxtaposition
        }
        skip_space();
      }
      const std::string symbol = read_symbol();
      const int power = read_power() * sign;
      const auto it = base_units().find(symbol);
      if (it == base_units().end()) {
        throw Error(ErrorCode::unit, "unknown unit symbol '" + symbol + "' in '" + out.symbol + "'");
      }
      out.dimension = combined(out.dimension, scaled(it->second.dimension, power));
      out.to_si *= std::pow(it->second.to_si, power);
      first = false;
    }
    return out;
  }

 private:
  std::string_view trimmed() const {
    auto b = text_.find_first_not_of(" \t");
    auto e = text_.find_last_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return text_.substr(b, e - b + 1);
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  std::string read_symbol() {
    const size_t begin = pos_;
    while (!at_end() && (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    if (begin == pos_) {
      throw Error(ErrorCode::unit, "malformed unit expression '" + std::string(text_) + "'");
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }

  int read_power() {
    if (starts_with("**")) {
      pos_ += 2;
    } else if (!at_end() && peek() == '^') {
      ++pos_;
    } else {
      return 1;
    }
    const size_t begin = pos_;
    if (!at_end() && (peek() == '-' || peek() == '+')) ++pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    const std::string digits(text_.substr(begin, pos_ - begin));
    if (digits.empty() || digits == "-" || digits == "+") {
      throw Error(ErrorCode::unit, "malformed exponent in '" + std::string(text_) + "'");
    }
    return std::stoi(digits);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

std::string power_term(const std::string& symbol, int power) {
  if (power == 1) return symbol;
  return symbol + "^" + std::to_string(power);
}

}  // namespace

std::string to_string(const Dimension& d) {
  std::ostringstream out;
  out << "L^" << d.length << " T^" << d.time << " M^" << d.mass;
  return out.str();
}

Unit parse_unit(std::string_view text) { return UnitParser(text).parse(); }

double convert(double value, const Unit& from, const Unit& to) {
  if (!(from.dimension == to.dimension)) {
    throw Error(ErrorCode::unit, "cannot convert '" + from.symbol + "' (" + to_string(from.dimension) +
                                     ") to '" + to.symbol + "' (" + to_string(to.dimension) + ")");
  }
  return value * from.to_si / to.to_si;
}

double UnitSystem::gravity() const {
  return kGravitySI * mass_to_si * time_to_si * time_to_si /
         (length_to_si * length_to_si * length_to_si);
}

double UnitSystem::to_si(const Dimension& d) const {
  return std::pow(length_to_si, d.length) * std::pow(time_to_si, d.time) *
         std::pow(mass_to_si, d.mass);
}

std::string UnitSystem::symbol_for(const Dimension& d) const {
  if (d == kDimensionless) return "";
  if (name == "si" && d == kEnergy) return "J";
  if (name == "cgs" && d == kEnergy) return "erg";
  // Mass first, then length, then time, e.g. "Msun AU^2/yr^2".
  std::string numerator;
  std::string denominator;
  auto append = [&](const std::string& symbol, int power) {
    if (power > 0) {
      numerator += (numerator.empty() ? "" : " ") + power_term(symbol, power);
    } else if (power < 0) {
      denominator += (denominator.empty() ? "" : " ") + power_term(symbol, -power);
    }
  };
  append(mass_symbol, d.mass);
  append(length_symbol, d.length);
  append(time_symbol, d.time);
  if (numerator.empty()) numerator = "1";
  return denominator.empty() ? numerator : numerator + "/" + denominator;
}

std::string unit_word(std::string_view symbol) {
  if (symbol == "s") return "seconds";
  if (symbol == "m") return "meters";
  if (symbol == "cm") return "centimeters";
  if (symbol == "km") return "kilometers";
  if (symbol == "AU") return "astronomical units (AU)";
  if (symbol == "yr") return "years";
  if (symbol == "day") return "days";
  if (symbol == "J") return "joules";
  if (symbol == "erg") return "ergs";
  if (symbol == "kg") return "kilograms";
  if (symbol == "g") return "grams";
  return std::string(symbol);
}

std::string UnitSystem::prose() const {
  return unit_word(time_symbol) + " and " + unit_word(length_symbol);
}

UnitSystem UnitSystem::si() { return {}; }

UnitSystem UnitSystem::cgs() { return {"cgs", "cm", "s", "g", 1e-2, 1.0, 1e-3}; }

UnitSystem UnitSystem::astro() {
  return {"astro", "AU", "yr", "Msun", kAstronomicalUnit, kJulianYear, kSolarMass};
}

UnitSystem UnitSystem::named(std::string_view name) {
  if (name == "si") return si();
  if (name == "cgs") return cgs();
  if (name == "astro") return astro();
  throw Error(ErrorCode::unit, "unknown unit system '" + std::string(name) + "'");
}

}  // namespace gravbench::sim
