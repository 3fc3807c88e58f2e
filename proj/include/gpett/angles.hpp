#pragma once

#include <cmath>
#include <numbers>

namespace gpett {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to [-pi, pi).
inline double wrap_pi(double angle) {
  double a = std::fmod(angle + std::numbers::pi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  double out = a - std::numbers::pi;
  // fmod round-off can land exactly on +pi
  return out >= std::numbers::pi ? out - kTwoPi : out;
}

/// Wraps an angle to [0, 2*pi).
inline double wrap_two_pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

}  // namespace gpett
