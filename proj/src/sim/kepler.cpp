#include "gravbench/sim/kepler.hpp"

#include <cmath>
#include <numbers>

#include "gravbench/error.hpp"

namespace gravbench::sim {
namespace {

struct Stumpff {
  double c2;
  double c3;
};

Stumpff stumpff(double psi) {
  if (std::abs(psi) < 0.1) {
    // Alternating series; 12 terms are below 1e-20 for |psi| < 0.1.
    double c2 = 0.0;
    double c3 = 0.0;
    double term2 = 0.5;
    double term3 = 1.0 / 6.0;
    for (int k = 0; k < 12; ++k) {
      c2 += term2;
      c3 += term3;
      term2 *= -psi / ((2.0 * k + 3.0) * (2.0 * k + 4.0));
      term3 *= -psi / ((2.0 * k + 4.0) * (2.0 * k + 5.0));
    }
    return {c2, c3};
  }
  if (psi > 0.0) {
    const double s = std::sqrt(psi);
    return {(1.0 - std::cos(s)) / psi, (s - std::sin(s)) / (psi * s)};
  }
  const double s = std::sqrt(-psi);
  return {(std::cosh(s) - 1.0) / -psi, (std::sinh(s) - s) / (-psi * s)};
}

}  // namespace

RelativeState propagate_kepler(const RelativeState& state, double mu, double dt) {
  if (dt == 0.0) return state;
  const double r0 = norm(state.position);
  if (r0 == 0.0) throw Error(ErrorCode::singularity, "zero separation in Kepler propagation");
  const double sqrt_mu = std::sqrt(mu);
  const double v0_sq = dot(state.velocity, state.velocity);
  const double rv = dot(state.position, state.velocity) / sqrt_mu;
  const double alpha = 2.0 / r0 - v0_sq / mu;  // inverse semi-major axis

  double t = dt;
  if (alpha > 0.0) {
    // Elliptic: whole periods are an exact identity; reduce to keep chi small.
    const double period = 2.0 * std::numbers::pi / (sqrt_mu * std::pow(alpha, 1.5));
    if (std::abs(t) > period) t = std::fmod(t, period);
  }

  auto residual = [&](double chi, double& r) {
    const double psi = alpha * chi * chi;
    const auto [c2, c3] = stumpff(psi);
    const double chi2 = chi * chi;
    r = chi2 * c2 + rv * chi * (1.0 - psi * c3) + r0 * (1.0 - psi * c2);
    return chi2 * chi * c3 + rv * chi2 * c2 + r0 * chi * (1.0 - psi * c3) - sqrt_mu * t;
  };

  double chi = alpha > 0.0 ? sqrt_mu * t * alpha : sqrt_mu * t / r0;
  if (alpha <= 0.0) {
    // Hyperbolic starting guess (Vallado) when the step is long.
    const double a = 1.0 / alpha;
    if (alpha < 0.0 && std::abs(t) * sqrt_mu > r0 * r0) {
      const double sign = t > 0.0 ? 1.0 : -1.0;
      const double arg = -2.0 * mu * alpha * t /
                         (dot(state.position, state.velocity) +
                          sign * std::sqrt(-mu * a) * (1.0 - r0 * alpha));
      if (arg > 0.0) chi = sign * std::sqrt(-a) * std::log(arg);
    }
  }

  // Laguerre-Conway iteration; converges from poor starts where Newton cycles.
  double r = r0;
  bool converged = false;
  for (int iter = 0; iter < 60; ++iter) {
    const double f = residual(chi, r);
    const double psi = alpha * chi * chi;
    const auto [c2, c3] = stumpff(psi);
    const double df = r;  // dF/dchi
    const double ddf = rv * (1.0 - psi * c2) + chi * (1.0 - r0 * alpha) * (1.0 - psi * c3);
    constexpr double n = 5.0;
    const double disc = std::abs((n - 1.0) * (n - 1.0) * df * df - n * (n - 1.0) * f * ddf);
    const double denom = df + (df >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc);
    const double delta = denom != 0.0 ? n * f / denom : f / df;
    chi -= delta;
    if (delta == 0.0 || std::abs(delta) <= 1e-14 * std::abs(chi)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::integration_failure, "universal Kepler equation did not converge");
  }
  residual(chi, r);

  const double psi = alpha * chi * chi;
  const auto [c2, c3] = stumpff(psi);
  const double chi2 = chi * chi;
  const double f = 1.0 - chi2 / r0 * c2;
  const double g = t - chi2 * chi / sqrt_mu * c3;
  const double f_dot = sqrt_mu / (r * r0) * chi * (psi * c3 - 1.0);
  const double g_dot = 1.0 - chi2 / r * c2;
  return {
      f * state.position + g * state.velocity,
      f_dot * state.position + g_dot * state.velocity,
  };
}

}  // namespace gravbench::sim
