// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/formation_control.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace circform;
using Vec2 = Eigen::Vector2d;

namespace {

FormationSpec chain_spec(double k_r = 8.0, double r = 80.0) {
  FormationSpec spec;
  spec.graph = {3, {{1, 2}, {2, 3}}};
  spec.desired_angles = {0.0, 0.0};
  spec.gain = k_r;
  spec.target_radius = r;
  return spec;
}

// Position on the r-circle at a travel-aligned phase.
Vec2 at_phase(double r, double theta) {
  return {r * std::cos(theta), -r * std::sin(theta)};
}

}  // namespace

TEST_CASE("inter-vehicle angle wraps the oriented difference") {
  CHECK(inter_vehicle_angle(0.7, 0.7) == 0.0);
  CHECK(inter_vehicle_angle(3.0, -3.0) ==
        doctest::Approx(6.0 - kTwoPi).epsilon(1e-12));
  CHECK(inter_vehicle_angle(kPi / 2, 0.0) == doctest::Approx(kPi / 2));
}

TEST_CASE("gain condition: margin, rejection, limits") {
  std::vector<std::string> warnings;
  CHECK(validate_gains(chain_spec(8.0), &warnings) ==
        doctest::Approx(80.0 - 16.0 * kPi));
  CHECK(warnings.empty());

  CHECK_THROWS_AS(validate_gains(chain_spec(13.0)), ValidationError);
  CHECK(validate_gains(chain_spec(1e-9)) == doctest::Approx(80.0));

  // Cyclic graphs are rejected outright.
  FormationSpec cyclic = chain_spec();
  cyclic.graph = {3, {{1, 2}, {2, 3}, {3, 1}}};
  cyclic.desired_angles = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(validate_gains(cyclic), ValidationError);

  // Disconnected graphs only warn.
  FormationSpec forest = chain_spec();
  forest.graph = {4, {{1, 2}, {3, 4}}};
  forest.desired_angles = {0.0, 0.0};
  validate_gains(forest, &warnings);
  CHECK(warnings.size() == 1);
}

TEST_CASE("local error from snapshots") {
  const auto spec = chain_spec();
  const Vec2 center = Vec2::Zero();
  std::vector<std::optional<NeighborSnapshot>> snaps(2);

  SUBCASE("agents at the desired separation have zero error") {
    snaps[0] = NeighborSnapshot{2, at_phase(80.0, 0.3), 1.0};
    const auto err = local_error(spec, 1, at_phase(80.0, 0.3), center, 1.5, snaps);
    REQUIRE(err.components.size() == 1);
    CHECK_FALSE(err.components[0].missing);
    CHECK(err.components[0].e_theta == doctest::Approx(0.0).scale(1.0));
    CHECK(err.components[0].staleness == doctest::Approx(0.5));
  }

  SUBCASE("tail leads the head by 0.1") {
    snaps[0] = NeighborSnapshot{2, at_phase(80.0, 0.0), 2.0};
    const auto err = local_error(spec, 1, at_phase(80.0, 0.1), center, 2.0, snaps);
    CHECK(err.components[0].e_theta == doctest::Approx(0.1));
    // The head agent computes the same error for the shared edge.
    std::vector<std::optional<NeighborSnapshot>> other(2);
    other[0] = NeighborSnapshot{1, at_phase(80.0, 0.1), 2.0};
    const auto err2 = local_error(spec, 2, at_phase(80.0, 0.0), center, 2.0, other);
    CHECK(err2.components[0].e_theta == doctest::Approx(0.1));
  }

  SUBCASE("cold start flags missing components") {
    const auto err = local_error(spec, 2, at_phase(80.0, 0.0), center, 0.0, snaps);
    REQUIRE(err.components.size() == 2);
    CHECK(err.components[0].missing);
    CHECK(err.components[1].missing);
    CHECK(err.components[0].staleness == -1.0);
    CHECK(radius_control(spec, 2, err) == 0.0);
  }

  SUBCASE("degenerate positions are rejected") {
    snaps[0] = NeighborSnapshot{2, center, 1.0};
    CHECK_THROWS_AS(local_error(spec, 1, at_phase(80.0, 0.0), center, 1.0, snaps),
                    DegeneracyError);
    CHECK_THROWS_AS(local_error(spec, 1, center, center, 1.0, snaps),
                    DegeneracyError);
  }
}

TEST_CASE("relative measurements produce identical angles") {
  const auto spec = chain_spec();
  const Vec2 own = at_phase(80.0, 1.2);
  const Vec2 nb = at_phase(80.0, 0.9);
  std::vector<std::optional<NeighborSnapshot>> absolute(2), relative(2);
  absolute[0] = NeighborSnapshot{2, nb, 3.0};
  relative[0] = snapshot_from_relative(2, own, own - nb, 3.0);
  const auto ea = local_error(spec, 1, own, Vec2::Zero(), 3.0, absolute);
  const auto er = local_error(spec, 1, own, Vec2::Zero(), 3.0, relative);
  CHECK(ea.components[0].e_theta == er.components[0].e_theta);
}

TEST_CASE("radius control is the consensus row product") {
  const auto spec = chain_spec();
  LocalFormationError err;
  err.components = {{0, 0.5, 0.0, false}, {1, -0.2, 0.0, false}};
  // Agent 2 carries B row [-1, 1].
  CHECK(radius_control(spec, 2, err) == doctest::Approx(-5.6));
  CHECK(level_command(-5.6, 80.0) == doctest::Approx(31.36 - 896.0));
  CHECK(level_command(0.0, 80.0) == 0.0);

  // Extreme command maps to the confinement radius.
  const double u_max = kPi * 8.0 * 2.0;
  CHECK(u_max == doctest::Approx(50.265).epsilon(1e-4));
  const double c = level_command(u_max, 80.0);
  CHECK(std::sqrt(80.0 * 80.0 + c) == doctest::Approx(80.0 + u_max));
}

TEST_CASE("radius command stays within the wrapped bound") {
  const auto spec = chain_spec();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 2000; ++trial) {
    LocalFormationError err;
    err.components = {{0, angle(rng), 0.0, false}, {1, angle(rng), 0.0, false}};
    const double u = radius_control(spec, 2, err);
    CHECK(std::abs(u) <= kPi * spec.gain * 2.0 + 1e-12);
    CHECK(spec.target_radius + u > 0.0);  // by the gain condition
  }
}

TEST_CASE("lagging agents get smaller circles, leading agents larger") {
  // Edge (1,2) with z* = 0: when 1 is ahead of 2 along travel, e > 0, so
  // agent 1 widens its circle to wait and agent 2 tightens to catch up.
  const auto spec = chain_spec();
  const Vec2 center = Vec2::Zero();
  std::vector<std::optional<NeighborSnapshot>> s1(2), s2(2);
  s1[0] = NeighborSnapshot{2, at_phase(80.0, 0.0), 0.0};
  s2[0] = NeighborSnapshot{1, at_phase(80.0, 1.5), 0.0};
  const auto e1 = local_error(spec, 1, at_phase(80.0, 1.5), center, 0.0, s1);
  const auto e2 = local_error(spec, 2, at_phase(80.0, 0.0), center, 0.0, s2);
  CHECK(radius_control(spec, 1, e1) > 0.0);  // waits
  CHECK(radius_control(spec, 2, e2) < 0.0);  // catches up
}

TEST_CASE("controller freezes components without fresh snapshots") {
  const auto spec = chain_spec();
  const Vec2 center = Vec2::Zero();
  AgentController ctrl(spec, 2);
  CHECK(ctrl.radius_offset() == 0.0);
  CHECK(ctrl.level() == 0.0);

  // First contact on edge 0 only.
  ctrl.receive(0, NeighborSnapshot{1, at_phase(80.0, 0.5), 1.0});
  ctrl.update(at_phase(80.0, 0.0), center, 1.0);
  const double u1 = ctrl.radius_offset();
  CHECK(u1 == doctest::Approx(8.0 * -0.5));  // B_2 = [-1, 1], e = (0.5, -)

  // No new snapshot: the component stays frozen even though the agent moved.
  ctrl.update(at_phase(80.0, 0.3), center, 2.0);
  CHECK(ctrl.radius_offset() == u1);
  const auto err = ctrl.current_error(3.0);
  CHECK(err.components[0].e_theta == doctest::Approx(0.5));
  CHECK(err.components[0].staleness == doctest::Approx(2.0));
  CHECK(err.components[1].missing);

  // Fresh snapshot updates the component.
  ctrl.receive(0, NeighborSnapshot{1, at_phase(80.0, 0.5), 2.5});
  ctrl.update(at_phase(80.0, 0.3), center, 2.5);
  CHECK(ctrl.radius_offset() == doctest::Approx(8.0 * (0.3 - 0.5)));
}

TEST_CASE("controller holds a configured initial command until contact") {
  const auto spec = chain_spec();
  AgentController ctrl(spec, 1, 50.0);
  CHECK(ctrl.radius_offset() == 50.0);
  ctrl.update(at_phase(80.0, 0.0), Vec2::Zero(), 5.0);  // nothing received
  CHECK(ctrl.radius_offset() == 50.0);
  CHECK(ctrl.level() == doctest::Approx(level_for_radius_offset(80.0, 50.0)));

  CHECK_THROWS_AS(AgentController(spec, 1, -80.0), ValidationError);
}

TEST_CASE("out-of-order deliveries never roll a snapshot back") {
  const auto spec = chain_spec();
  AgentController ctrl(spec, 1);
  ctrl.receive(0, NeighborSnapshot{2, at_phase(80.0, 0.2), 4.0});
  ctrl.receive(0, NeighborSnapshot{2, at_phase(80.0, 0.9), 3.0});  // stale
  ctrl.update(at_phase(80.0, 0.2), Vec2::Zero(), 4.0);
  CHECK(ctrl.radius_offset() == doctest::Approx(8.0 * 0.0).scale(1.0));
}

TEST_CASE("symmetric loss-free commands sum to zero") {
  const auto spec = chain_spec();
  const Vec2 center = Vec2::Zero();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 500; ++trial) {
    const double t1 = angle(rng), t2 = angle(rng), t3 = angle(rng);
    const Vec2 p1 = at_phase(80.0, t1), p2 = at_phase(80.0, t2),
               p3 = at_phase(80.0, t3);
    std::vector<std::optional<NeighborSnapshot>> s1(2), s2(2), s3(2);
    s1[0] = NeighborSnapshot{2, p2, 0.0};
    s2[0] = NeighborSnapshot{1, p1, 0.0};
    s2[1] = NeighborSnapshot{3, p3, 0.0};
    s3[1] = NeighborSnapshot{2, p2, 0.0};
    const double sum =
        radius_control(spec, 1, local_error(spec, 1, p1, center, 0.0, s1)) +
        radius_control(spec, 2, local_error(spec, 2, p2, center, 0.0, s2)) +
        radius_control(spec, 3, local_error(spec, 3, p3, center, 0.0, s3));
    CHECK(std::abs(sum) <= 1e-12 * spec.gain * 3.0 * kPi);
  }
}
