// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "circform/angles.hpp"
#include "circform/errors.hpp"

namespace circform {

enum class PathKind { kCircle, kEllipse };

/// Planar implicit curve with an assigned level offset c.
///
///   circle:  phi(p) = px^2 + py^2 - r^2          (levels in m^2)
///   ellipse: phi(p) = (px/a)^2 + (py/b)^2 - 1    (dimensionless levels)
///
/// All geometry is evaluated in center-relative coordinates; the curve is
/// C^2 and regular everywhere except the center. The tracked set is
/// { p : phi(p) = c }.
template <typename Scalar = double>
struct ImplicitPath {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

  PathKind kind = PathKind::kCircle;
  Vec2 center = Vec2::Zero();
  Scalar radius = Scalar(1);                       // circle
  Scalar semi_a = Scalar(1), semi_b = Scalar(1);   // ellipse
  Scalar level_offset = Scalar(0);                 // assigned level set c

  static ImplicitPath circle(Scalar r, Vec2 c = Vec2::Zero(),
                             Scalar level = Scalar(0)) {
    if (!(r > Scalar(0))) {
      throw ValidationError("path: circle radius must be positive");
    }
    ImplicitPath p;
    p.kind = PathKind::kCircle;
    p.radius = r;
    p.center = c;
    p.level_offset = level;
    return p;
  }

  static ImplicitPath ellipse(Scalar a, Scalar b, Vec2 c = Vec2::Zero(),
                              Scalar level = Scalar(0)) {
    if (!(a > Scalar(0)) || !(b > Scalar(0))) {
      throw ValidationError("path: ellipse semi-axes must be positive");
    }
    ImplicitPath p;
    p.kind = PathKind::kEllipse;
    p.semi_a = a;
    p.semi_b = b;
    p.center = c;
    p.level_offset = level;
    return p;
  }

  ImplicitPath with_level(Scalar c) const {
    ImplicitPath p = *this;
    p.level_offset = c;
    return p;
  }
};

/// Positions closer than this to the center are treated as degenerate
/// (the gradient vanishes only exactly at the center).
inline constexpr double kDegenerateRadius = 1e-9;

namespace detail {

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 2, 1> center_relative(const ImplicitPath<Scalar>& path,
                                            const Eigen::MatrixBase<Derived>& p,
                                            bool require_regular) {
  Eigen::Matrix<Scalar, 2, 1> q = p - path.center;
  if (require_regular && q.norm() < Scalar(kDegenerateRadius)) {
    throw DegeneracyError("degenerate point: position at the path center");
  }
  return q;
}

}  // namespace detail

/// Raw curve function phi(p), ignoring the assigned level offset.
template <typename Scalar, typename Derived>
Scalar curve_value(const ImplicitPath<Scalar>& path,
                   const Eigen::MatrixBase<Derived>& p) {
  const auto q = detail::center_relative(path, p, false);
  if (path.kind == PathKind::kCircle) {
    return q.squaredNorm() - path.radius * path.radius;
  }
  const Scalar x = q.x() / path.semi_a;
  const Scalar y = q.y() / path.semi_b;
  return x * x + y * y - Scalar(1);
}

/// Tracking error e(p) = phi(p) - c for the assigned level set.
template <typename Scalar, typename Derived>
Scalar level(const ImplicitPath<Scalar>& path,
             const Eigen::MatrixBase<Derived>& p) {
  return curve_value(path, p) - path.level_offset;
}

template <typename Scalar = double>
struct PathFrame {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

  Scalar e = Scalar(0);                 // phi(p) - c
  Vec2 normal = Vec2::Zero();           // gradient of phi
  Vec2 tangent = Vec2::Zero();          // normal rotated clockwise
  Eigen::Matrix<Scalar, 2, 2> hessian = Eigen::Matrix<Scalar, 2, 2>::Zero();
};

/// Level, gradient, tangent and Hessian of phi at p. Throws DegeneracyError
/// at the center, where the gradient vanishes.
template <typename Scalar, typename Derived>
PathFrame<Scalar> frame(const ImplicitPath<Scalar>& path,
                        const Eigen::MatrixBase<Derived>& p) {
  const auto q = detail::center_relative(path, p, true);
  PathFrame<Scalar> f;
  if (path.kind == PathKind::kCircle) {
    f.e = q.squaredNorm() - path.radius * path.radius - path.level_offset;
    f.normal = Scalar(2) * q;
    f.hessian = Scalar(2) * Eigen::Matrix<Scalar, 2, 2>::Identity();
  } else {
    const Scalar ia2 = Scalar(1) / (path.semi_a * path.semi_a);
    const Scalar ib2 = Scalar(1) / (path.semi_b * path.semi_b);
    f.e = q.x() * q.x() * ia2 + q.y() * q.y() * ib2 - Scalar(1) -
          path.level_offset;
    f.normal = {Scalar(2) * q.x() * ia2, Scalar(2) * q.y() * ib2};
    f.hessian << Scalar(2) * ia2, Scalar(0), Scalar(0), Scalar(2) * ib2;
  }
  f.tangent = rot90_cw<Scalar>(f.normal);
  return f;
}

/// Angle of the center-relative position, in (-pi, pi]. The same formula
/// parametrizes every level set of the curve.
template <typename Scalar, typename Derived>
Scalar parametrize(const ImplicitPath<Scalar>& path,
                   const Eigen::MatrixBase<Derived>& p) {
  const auto q = detail::center_relative(path, p, true);
  return wrap_pi(std::atan2(q.y(), q.x()));
}

/// Phase that increases along the direction of travel induced by the
/// clockwise tangent; the negative of parametrize(), rewrapped.
template <typename Scalar, typename Derived>
Scalar travel_angle(const ImplicitPath<Scalar>& path,
                    const Eigen::MatrixBase<Derived>& p) {
  return wrap_pi(-parametrize(path, p));
}

/// Level set whose circle has radius r + u_r: c = u_r^2 + 2 r u_r.
/// Rejects offsets that would close or invert the circle.
inline double level_for_radius_offset(double r, double u_r) {
  if (!(r + u_r > 0.0)) {
    throw ValidationError("radius offset " + std::to_string(u_r) +
                          " yields non-positive radius for r=" +
                          std::to_string(r));
  }
  return u_r * u_r + 2.0 * r * u_r;
}

/// Radius of the circle carrying level set c around target radius r.
inline double radius_for_level(double r, double c) {
  const double rr = r * r + c;
  if (!(rr > 0.0)) {
    throw ValidationError("level " + std::to_string(c) +
                          " is below the degenerate level -r^2");
  }
  return std::sqrt(rr);
}

namespace detail {

template <typename Scalar, typename F>
Scalar adaptive_simpson(const F& f, Scalar a, Scalar b, Scalar fa, Scalar fm,
                        Scalar fb, Scalar whole, Scalar tol, int depth) {
  const Scalar m = (a + b) / Scalar(2);
  const Scalar lm = (a + m) / Scalar(2);
  const Scalar rm = (m + b) / Scalar(2);
  const Scalar flm = f(lm);
  const Scalar frm = f(rm);
  const Scalar left = (m - a) / Scalar(6) * (fa + Scalar(4) * flm + fm);
  const Scalar right = (b - m) / Scalar(6) * (fm + Scalar(4) * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= Scalar(15) * tol) {
    return left + right + delta / Scalar(15);
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / Scalar(2),
                          depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / Scalar(2),
                          depth - 1);
}

template <typename Scalar, typename F>
Scalar integrate(const F& f, Scalar a, Scalar b, Scalar tol) {
  const Scalar fa = f(a);
  const Scalar m = (a + b) / Scalar(2);
  const Scalar fm = f(m);
  const Scalar fb = f(b);
  const Scalar whole = (b - a) / Scalar(6) * (fa + Scalar(4) * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 24);
}

}  // namespace detail

/// Arc length of the level set { phi = c }. Closed form for circles,
/// adaptive quadrature for ellipses. Throws on empty level sets.
template <typename Scalar>
Scalar perimeter(const ImplicitPath<Scalar>& path, Scalar level_c) {
  if (path.kind == PathKind::kCircle) {
    const Scalar rr = path.radius * path.radius + level_c;
    if (rr < Scalar(0)) {
      throw ValidationError("perimeter: empty circle level set (c < -r^2)");
    }
    return Scalar(kTwoPi) * std::sqrt(rr);
  }
  const Scalar s = Scalar(1) + level_c;
  if (s < Scalar(0)) {
    throw ValidationError("perimeter: empty ellipse level set (c < -1)");
  }
  // The level set is the base ellipse scaled by sqrt(1 + c).
  const Scalar a = path.semi_a;
  const Scalar b = path.semi_b;
  const auto speed = [a, b](Scalar t) {
    const Scalar sx = a * std::sin(t);
    const Scalar cy = b * std::cos(t);
    return std::sqrt(sx * sx + cy * cy);
  };
  const Scalar base =
      detail::integrate(speed, Scalar(0), Scalar(kTwoPi), Scalar(1e-12) * a);
  return std::sqrt(s) * base;
}

using ImplicitPathd = ImplicitPath<double>;
using PathFramed = PathFrame<double>;

}  // namespace circform
