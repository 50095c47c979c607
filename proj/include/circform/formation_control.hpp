// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "circform/angles.hpp"
#include "circform/errors.hpp"
#include "circform/formation_graph.hpp"
#include "circform/implicit_path.hpp"

namespace circform {

/// Last position received from a neighbor, with its delivery time.
struct NeighborSnapshot {
  int neighbor = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double receive_time = 0.0;
};

/// Builds a snapshot from a relative measurement taken by the receiver
/// (own position minus measured offset to the neighbor). Produces the same
/// inter-vehicle angles as receiving the neighbor's absolute position.
inline NeighborSnapshot snapshot_from_relative(
    int neighbor, const Eigen::Vector2d& own_position,
    const Eigen::Vector2d& offset_to_neighbor, double time) {
  return {neighbor, own_position - offset_to_neighbor, time};
}

/// Formation problem statement: who talks to whom, the desired separations
/// on the circle, the consensus gain and the target radius.
struct FormationSpec {
  FormationGraph graph;
  std::vector<double> desired_angles;  // z* per edge, rad, in (-pi, pi]
  double gain = 0.0;                   // k_r, m/rad
  double target_radius = 0.0;          // r, m
};

/// Enforces the structural invariants and the gain condition
///   r - pi * k_r * max_degree > 0,
/// which keeps every commandable radius positive. Returns the margin in
/// meters; throws ValidationError on violation. Cyclic graphs are rejected
/// here (the consensus matrix loses its Hurwitz property on cycles);
/// disconnected graphs produce a warning, appended to `warnings` when given.
double validate_gains(const FormationSpec& spec,
                      std::vector<std::string>* warnings = nullptr);

/// Wrapped separation angle along an oriented edge: z = wrap(theta_tail -
/// theta_head). Angle convention of the inputs is the caller's choice.
inline double inter_vehicle_angle(double theta_tail, double theta_head) {
  return wrap_pi(theta_tail - theta_head);
}

/// Local formation error of one agent: one component per incident edge,
/// each wrapped to (-pi, pi]. Components without a snapshot are flagged
/// missing and excluded from control.
struct LocalFormationError {
  struct Component {
    int edge = 0;          // 0-based edge index
    double e_theta = 0.0;  // wrapped error, rad
    double staleness = 0.0;  // seconds since the snapshot was received
    bool missing = false;
  };
  std::vector<Component> components;  // incident edges, in edge order
};

/// Computes the agent's local view of its incident edge errors from the
/// current snapshot set. Angles are the travel-aligned phases around
/// `center`, so they increase along the direction of motion.
/// `snapshots` is indexed by edge (size |E|); non-incident entries are
/// ignored.
LocalFormationError local_error(
    const FormationSpec& spec, int agent, const Eigen::Vector2d& own_position,
    const Eigen::Vector2d& center, double now,
    const std::vector<std::optional<NeighborSnapshot>>& snapshots);

/// Consensus control: u_r = k_r * (row of B) * e_theta, with missing
/// components treated as zero. Bounded by pi * k_r * degree because every
/// component is wrapped.
double radius_control(const FormationSpec& spec, int agent,
                      const LocalFormationError& error);

/// Output stage of the controller: the level set carrying radius r + u_r.
inline double level_command(double u_r, double r) {
  return level_for_radius_offset(r, u_r);
}

/// Per-agent distributed controller. Holds the snapshot store and the
/// frozen error components: a component is recomputed only when a fresh
/// snapshot has arrived for its edge, otherwise the last value is kept
/// (or zero if nothing was ever received), so a silent network freezes the
/// bounded command u_r instead of leaving the vehicle uncontrolled.
/// Keeps a reference to the spec, which must outlive the controller.
class AgentController {
 public:
  AgentController(const FormationSpec& spec, int agent_id,
                  double initial_radius_offset = 0.0);

  /// Stores a delivered message; ignores stale out-of-order deliveries.
  void receive(int edge, const NeighborSnapshot& snapshot);

  /// Recomputes fresh error components and the radius command. Called at
  /// the communication tick rate.
  void update(const Eigen::Vector2d& own_position,
              const Eigen::Vector2d& center, double now);

  double radius_offset() const { return u_r_; }
  double level() const { return level_command(u_r_, spec_->target_radius); }

  /// Frozen per-edge components with staleness evaluated at `now`.
  LocalFormationError current_error(double now) const;

  int agent_id() const { return agent_; }

 private:
  const FormationSpec* spec_;
  int agent_ = 0;
  std::vector<int> incident_;  // 0-based edge indices
  std::vector<std::optional<NeighborSnapshot>> snapshots_;  // by edge
  struct Frozen {
    double value = 0.0;
    bool ever_computed = false;
    double computed_from_receive_time = -1.0;
  };
  std::vector<Frozen> frozen_;  // by edge (only incident entries used)
  bool any_ever_received_ = false;
  double u_r_ = 0.0;
};

}  // namespace circform
