#pragma once

#include <cmath>

namespace telc {

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
  const double w = std::remainder(angle, 2.0 * M_PI);
  return w <= -M_PI ? w + 2.0 * M_PI : w;
}

/// Shortest signed angular distance from b to a, in (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace telc
