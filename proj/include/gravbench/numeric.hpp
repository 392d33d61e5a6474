#pragma once

#include <span>
#include <vector>

namespace gravbench {

struct Vertex {
  double t = 0.0;
  double value = 0.0;
  bool valid = false;  // false when the three points are collinear
};

/// Vertex of the parabola through three points with distinct abscissae.
Vertex parabola_vertex(double t0, double y0, double t1, double y1, double t2, double y2);

/// Ordinary least-squares line y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  size_t n = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);
double mean(std::span<const double> values);

/// Time average of y(t) by the trapezoid rule over the full span of t.
double time_average(std::span<const double> t, std::span<const double> y);

/// Largest sample, refined by a parabola through it and its neighbours when
/// it is interior. Never below the largest sample.
Vertex refined_maximum(std::span<const double> t, std::span<const double> y);
Vertex refined_minimum(std::span<const double> t, std::span<const double> y);

/// Fraction of [t.front(), t.back()] during which the piecewise-linear y(t)
/// lies strictly below `level`.
double fraction_below(std::span<const double> t, std::span<const double> y, double level);

/// First time the piecewise-linear y(t) reaches `level`. Throws
/// Error{insufficient_coverage} when it never does.
double first_crossing(std::span<const double> t, std::span<const double> y, double level);

}  // namespace gravbench
