// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/formation_control.hpp"

#include <cmath>
#include <string>

namespace circform {

namespace {

double travel_phase(const Eigen::Vector2d& position,
                    const Eigen::Vector2d& center) {
  const Eigen::Vector2d q = position - center;
  if (q.norm() < kDegenerateRadius) {
    throw DegeneracyError("formation: position at the circle center");
  }
  return wrap_pi(-std::atan2(q.y(), q.x()));
}

}  // namespace

double validate_gains(const FormationSpec& spec,
                      std::vector<std::string>* warnings) {
  validate(spec.graph);
  if (!is_acyclic(spec.graph)) {
    throw ValidationError(
        "formation: graph contains a cycle; the consensus matrix is not "
        "Hurwitz on cyclic graphs");
  }
  if (!is_connected(spec.graph) && warnings != nullptr) {
    warnings->push_back(
        "graph is disconnected: convergence holds per component only");
  }
  if (spec.desired_angles.size() !=
      static_cast<size_t>(spec.graph.edge_count())) {
    throw ValidationError("formation: need one desired angle per edge (" +
                          std::to_string(spec.graph.edge_count()) + "), got " +
                          std::to_string(spec.desired_angles.size()));
  }
  if (!(spec.target_radius > 0.0)) {
    throw ValidationError("formation: target radius must be positive");
  }
  if (spec.gain < 0.0) {
    throw ValidationError("formation: gain k_r must be non-negative");
  }
  const double margin =
      spec.target_radius - kPi * spec.gain * max_degree(spec.graph);
  if (!(margin > 0.0)) {
    throw ValidationError(
        "formation: gain condition violated: r - pi*k_r*max_degree = " +
        std::to_string(margin) + " <= 0 (r=" +
        std::to_string(spec.target_radius) + ", k_r=" +
        std::to_string(spec.gain) + ", max_degree=" +
        std::to_string(max_degree(spec.graph)) + ")");
  }
  return margin;
}

LocalFormationError local_error(
    const FormationSpec& spec, int agent, const Eigen::Vector2d& own_position,
    const Eigen::Vector2d& center, double now,
    const std::vector<std::optional<NeighborSnapshot>>& snapshots) {
  LocalFormationError out;
  const double own_theta = travel_phase(own_position, center);
  for (const int k : incident_edges(spec.graph, agent)) {
    LocalFormationError::Component comp;
    comp.edge = k;
    const auto& snap =
        k < static_cast<int>(snapshots.size()) ? snapshots[k] : std::nullopt;
    if (!snap.has_value()) {
      comp.missing = true;
      comp.staleness = -1.0;
      out.components.push_back(comp);
      continue;
    }
    const double nb_theta = travel_phase(snap->position, center);
    const bool is_tail = spec.graph.edges[k].first == agent;
    const double z = is_tail ? inter_vehicle_angle(own_theta, nb_theta)
                             : inter_vehicle_angle(nb_theta, own_theta);
    comp.e_theta = wrap_pi(z - spec.desired_angles[k]);
    comp.staleness = now - snap->receive_time;
    out.components.push_back(comp);
  }
  return out;
}

double radius_control(const FormationSpec& spec, int agent,
                      const LocalFormationError& error) {
  double sum = 0.0;
  for (const auto& comp : error.components) {
    if (comp.missing) continue;
    const double b = spec.graph.edges[comp.edge].first == agent ? 1.0 : -1.0;
    sum += b * comp.e_theta;
  }
  return spec.gain * sum;
}

AgentController::AgentController(const FormationSpec& spec, int agent_id,
                                 double initial_radius_offset)
    : spec_(&spec),
      agent_(agent_id),
      incident_(incident_edges(spec.graph, agent_id)),
      snapshots_(spec.graph.edge_count()),
      frozen_(spec.graph.edge_count()),
      u_r_(initial_radius_offset) {
  if (!(spec.target_radius + initial_radius_offset > 0.0)) {
    throw ValidationError("controller: initial radius offset " +
                          std::to_string(initial_radius_offset) +
                          " yields non-positive radius");
  }
}

void AgentController::receive(int edge, const NeighborSnapshot& snapshot) {
  auto& slot = snapshots_[edge];
  if (slot.has_value() && snapshot.receive_time < slot->receive_time) {
    return;  // receive time never decreases per neighbor
  }
  slot = snapshot;
  any_ever_received_ = true;
}

void AgentController::update(const Eigen::Vector2d& own_position,
                             const Eigen::Vector2d& center, double now) {
  if (!any_ever_received_) {
    return;  // cold start: hold the configured initial command
  }
  const LocalFormationError fresh =
      local_error(*spec_, agent_, own_position, center, now, snapshots_);
  for (const auto& comp : fresh.components) {
    if (comp.missing) continue;
    auto& slot = frozen_[comp.edge];
    const double recv = snapshots_[comp.edge]->receive_time;
    if (!slot.ever_computed || recv > slot.computed_from_receive_time) {
      slot.value = comp.e_theta;
      slot.ever_computed = true;
      slot.computed_from_receive_time = recv;
    }
  }
  LocalFormationError held = current_error(now);
  u_r_ = radius_control(*spec_, agent_, held);
}

LocalFormationError AgentController::current_error(double now) const {
  LocalFormationError out;
  for (const int k : incident_) {
    LocalFormationError::Component comp;
    comp.edge = k;
    if (!frozen_[k].ever_computed) {
      comp.missing = true;
      comp.staleness = -1.0;
    } else {
      comp.e_theta = frozen_[k].value;
      comp.staleness = now - snapshots_[k]->receive_time;
    }
    out.components.push_back(comp);
  }
  return out;
}

}  // namespace circform
