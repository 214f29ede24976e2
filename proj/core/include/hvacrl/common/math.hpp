#pragma once

#include <cmath>
#include <numbers>

namespace hvacrl {

// sin(pi*x) / cos(pi*x) with exact argument reduction, so that dyadic phases
// hit exact values: sinpi(1.0) == 0.0, cospi(1.0) == -1.0, cospi(0.5) == 0.0.
// Plain std::sin(pi * x) misses these because pi itself is rounded.
inline double sinpi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;          // r in [0, 2)
  double sign = 1.0;
  if (r >= 1.0) {
    r -= 1.0;
    sign = -1.0;
  }
  if (r > 0.5) r = 1.0 - r;       // r in [0, 0.5]
  if (r == 0.0) return sign * 0.0;
  if (r == 0.5) return sign;
  return sign * std::sin(std::numbers::pi * r);
}

inline double cospi(double x) {
  double r = std::fmod(std::fabs(x), 2.0);  // cos is even
  if (r >= 1.0) r = 2.0 - r;      // r in [0, 1]
  double sign = 1.0;
  if (r > 0.5) {
    r = 1.0 - r;
    sign = -1.0;
  }
  if (r == 0.0) return sign;
  if (r == 0.5) return 0.0;
  return sign * std::cos(std::numbers::pi * r);
}

inline double softplus(double x) {
  // log(1 + e^x), stable on both tails
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double inverse_softplus(double y) {
  // x such that softplus(x) == y, for y > 0
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

}  // namespace hvacrl
