// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace circform {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi]. A value landing exactly on -pi maps to +pi.
template <typename Scalar>
Scalar wrap_pi(Scalar x) {
  Scalar y = std::remainder(x, Scalar(kTwoPi));
  if (y <= Scalar(-kPi)) {
    y += Scalar(kTwoPi);
  }
  return y;
}

/// z-component of the planar cross product a x b.
template <typename Scalar>
Scalar cross2(const Eigen::Matrix<Scalar, 2, 1>& a,
              const Eigen::Matrix<Scalar, 2, 1>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Rotates a vector by -90 degrees (clockwise).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> rot90_cw(const Eigen::Matrix<Scalar, 2, 1>& v) {
  return {v.y(), -v.x()};
}

template <typename Scalar>
Scalar deg_to_rad(Scalar deg) {
  return deg * Scalar(kPi) / Scalar(180);
}

template <typename Scalar>
Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / Scalar(kPi);
}

}  // namespace circform
