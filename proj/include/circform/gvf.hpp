// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "circform/angles.hpp"
#include "circform/errors.hpp"
#include "circform/implicit_path.hpp"

namespace circform {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

template <typename Scalar = double>
struct GuidanceGains {
  Scalar field_gain = Scalar(1);  // k_e: error weight of the field, 1/m^2
  Scalar align_gain = Scalar(1);  // k_d: heading convergence toward the field

  void validate() const {
    if (!(field_gain > Scalar(0)) || !(align_gain > Scalar(0))) {
      throw ValidationError("guidance gains must be strictly positive");
    }
  }
};

template <typename Scalar = double>
struct GuidanceOutput {
  Scalar yaw_rate = Scalar(0);  // commanded psi-dot, rad/s
  Scalar bank = Scalar(0);      // saturated coordinated-turn bank, rad
  Eigen::Matrix<Scalar, 2, 1> desired_heading =
      Eigen::Matrix<Scalar, 2, 1>::Zero();  // unit field direction
};

/// Guidance field toward the assigned level set: tangent flow plus an error
/// correction along the normal,  pd = tau - k_e * e * n.
/// Throws ZeroFieldError if the field vanishes (cannot happen for circles
/// or ellipses, whose tangent is orthogonal to the normal).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> desired_velocity(const PathFrame<Scalar>& f,
                                             Scalar field_gain) {
  Eigen::Matrix<Scalar, 2, 1> pd = f.tangent - field_gain * f.e * f.normal;
  const Scalar scale = std::max(Scalar(1), f.normal.squaredNorm());
  if (pd.squaredNorm() < Scalar(1e-24) * scale) {
    throw ZeroFieldError("guidance field vanished at the query point");
  }
  return pd;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 2, 1> desired_velocity(const ImplicitPath<Scalar>& path,
                                             const Eigen::MatrixBase<Derived>& p,
                                             Scalar field_gain) {
  return desired_velocity(frame(path, p), field_gain);
}

/// Turn-rate command for a constant-speed vehicle tracking the field.
///
/// Two terms:
///  - feed-forward: the rotation rate of the field direction along the
///    current motion, cross(pd, dpd) / |pd|^2 per meter traveled, where
///    dpd is the directional derivative of the field along the heading
///    (chain rule through the gradient and Hessian of phi);
///  - alignment: k_d * cross(m, pd_hat), the sine of the angle from the
///    heading to the field direction.
/// Both are derived at unit speed and scaled by the vehicle speed, so a
/// vehicle at speed s flies the unit-speed geometry s times faster.
template <typename Scalar>
Scalar steering_from_frame(const PathFrame<Scalar>& f,
                           const Eigen::Matrix<Scalar, 2, 1>& heading,
                           Scalar speed, const GuidanceGains<Scalar>& gains) {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  const Vec2 pd = desired_velocity(f, gains.field_gain);
  const Vec2 hm = f.hessian * heading;
  const Vec2 field_derivative =
      rot90_cw<Scalar>(hm) -
      gains.field_gain * (f.e * hm + f.normal.dot(heading) * f.normal);
  const Scalar feed_forward =
      cross2<Scalar>(pd, field_derivative) / pd.squaredNorm();
  const Scalar align = cross2<Scalar>(heading, Vec2(pd.normalized()));
  return speed * (feed_forward + gains.align_gain * align);
}

template <typename Scalar, typename Derived>
Scalar steering(const ImplicitPath<Scalar>& path,
                const Eigen::MatrixBase<Derived>& position, Scalar yaw,
                Scalar speed, const GuidanceGains<Scalar>& gains) {
  if (!(speed > Scalar(0))) {
    throw ValidationError("steering requires positive speed");
  }
  const Eigen::Matrix<Scalar, 2, 1> heading{std::cos(yaw), std::sin(yaw)};
  return steering_from_frame(frame(path, position), heading, speed, gains);
}

/// Bank angle realizing yaw rate u_psi in a coordinated turn,
/// atan(speed * u_psi / g), saturated at the configured limit.
template <typename Scalar>
Scalar bank_angle(Scalar u_psi, Scalar speed, Scalar gravity,
                  Scalar bank_limit) {
  const Scalar raw = std::atan(speed * u_psi / gravity);
  return std::clamp(raw, -bank_limit, bank_limit);
}

/// Full guidance evaluation used by the simulator.
template <typename Scalar, typename Derived>
GuidanceOutput<Scalar> guidance(const ImplicitPath<Scalar>& path,
                                const Eigen::MatrixBase<Derived>& position,
                                Scalar yaw, Scalar speed,
                                const GuidanceGains<Scalar>& gains,
                                Scalar gravity, Scalar bank_limit) {
  GuidanceOutput<Scalar> out;
  const auto f = frame(path, position);
  out.desired_heading = desired_velocity(f, gains.field_gain).normalized();
  const Eigen::Matrix<Scalar, 2, 1> heading{std::cos(yaw), std::sin(yaw)};
  out.yaw_rate = steering_from_frame(f, heading, speed, gains);
  out.bank = bank_angle(out.yaw_rate, speed, gravity, bank_limit);
  return out;
}

using GuidanceGainsd = GuidanceGains<double>;
using GuidanceOutputd = GuidanceOutput<double>;

}  // namespace circform
