#pragma once

#include <span>

namespace kerr {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 2 distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares c in y - y0 = c t^2 (single-parameter, through the origin in t^2).
double fit_quadratic_coefficient(std::span<const double> t, std::span<const double> dy);

}  // namespace kerr
