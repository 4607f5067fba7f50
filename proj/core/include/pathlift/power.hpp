#pragma once

#include <cmath>

namespace pathlift {

/// x^p for x >= 0 with exact small-integer fast paths.
inline double pow_p(double x, double p) noexcept {
  if (p == 2.0) return x * x;
  if (p == 4.0) {
    const double x2 = x * x;
    return x2 * x2;
  }
  if (p == 1.0) return x;
  if (p == 3.0) return x * x * x;
  return std::pow(x, p);
}

/// (squared distance)^{p/2}, i.e. |v|^p given |v|^2.
inline double pow_half_p(double sq, double p) noexcept {
  if (p == 2.0) return sq;
  if (p == 4.0) return sq * sq;
  if (p == 1.0) return std::sqrt(sq);
  return std::pow(sq, 0.5 * p);
}

}  // namespace pathlift
