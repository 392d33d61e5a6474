#include "gravbench/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gravbench/error.hpp"

namespace gravbench {

Vertex parabola_vertex(double t0, double y0, double t1, double y1, double t2, double y2) {
  // Divided differences relative to the middle point keep this well-scaled.
  const double a0 = t0 - t1;
  const double a2 = t2 - t1;
  const double d0 = (y0 - y1) / a0;
  const double d2 = (y2 - y1) / a2;
  const double curvature = (d2 - d0) / (a2 - a0);
  if (curvature == 0.0 || !std::isfinite(curvature)) return {t1, y1, false};
  const double slope_at_mid = d0 - curvature * a0;  // derivative at t1
  const double offset = -slope_at_mid / (2.0 * curvature);
  return {t1 + offset, y1 + slope_at_mid * offset + curvature * offset * offset, true};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::validation, "line fit needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::conditioning, "line fit abscissae have no spread");
  LineFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 2) fit.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::validation, "median of an empty set");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::validation, "mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double time_average(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 2) {
    throw Error(ErrorCode::validation, "time average needs at least two samples");
  }
  double integral = 0.0;
  for (size_t i = 1; i < t.size(); ++i) integral += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw Error(ErrorCode::validation, "time average over an empty interval");
  return integral / span;
}

Vertex refined_maximum(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.empty()) {
    throw Error(ErrorCode::validation, "extremum of an empty series");
  }
  const size_t i = static_cast<size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  Vertex best{t[i], y[i], false};
  if (i == 0 || i + 1 == y.size()) return best;
  const Vertex v = parabola_vertex(t[i - 1], y[i - 1], t[i], y[i], t[i + 1], y[i + 1]);
  if (v.valid && v.value >= y[i] && v.t >= t[i - 1] && v.t <= t[i + 1] && std::isfinite(v.value)) {
    return v;
  }
  return best;
}

Vertex refined_minimum(std::span<const double> t, std::span<const double> y) {
  std::vector<double> neg(y.size());
  std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
  Vertex v = refined_maximum(t, neg);
  v.value = -v.value;
  return v;
}

double fraction_below(std::span<const double> t, std::span<const double> y, double level) {
  if (t.size() != y.size() || t.size() < 2) {
    throw Error(ErrorCode::validation, "fraction needs at least two samples");
  }
  double below = 0.0;
  for (size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    const double a = y[i - 1] - level;
    const double b = y[i] - level;
    if (a < 0.0 && b < 0.0) {
      below += dt;
    } else if (a < 0.0 || b < 0.0) {
      // One endpoint below: the linear segment crosses the level once.
      const double part = (a < 0.0 ? a : b) / (a - b);
      below += dt * std::abs(part);
    }
  }
  return below / (t.back() - t.front());
}

double first_crossing(std::span<const double> t, std::span<const double> y, double level) {
  if (t.size() != y.size() || t.empty()) {
    throw Error(ErrorCode::validation, "crossing of an empty series");
  }
  if (y[0] >= level) return t[0];
  for (size_t i = 1; i < t.size(); ++i) {
    if (y[i] >= level) {
      const double s = (level - y[i - 1]) / (y[i] - y[i - 1]);
      return t[i - 1] + s * (t[i] - t[i - 1]);
    }
  }
  throw Error(ErrorCode::insufficient_coverage, "series never reaches the requested level");
}

}  // namespace gravbench
