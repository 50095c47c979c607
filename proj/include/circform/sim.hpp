// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "circform/formation_control.hpp"
#include "circform/scenario.hpp"

namespace circform {

/// Unicycle state: constant-speed vehicle with yaw kinematics.
struct AgentState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double yaw = 0.0;    // rad, (-pi, pi]
  double speed = 0.0;  // m/s, constant for the whole run
  double level = 0.0;  // assigned level set c
};

/// One RK4 step of  p' = speed * [cos psi, sin psi] + wind,  psi' = u_psi,
/// with the turn rate held constant over the step. Yaw is rewrapped; speed
/// is structural and never integrated.
AgentState step_unicycle(const AgentState& state, double u_psi, double dt,
                         const Eigen::Vector2d& wind = Eigen::Vector2d::Zero());

/// Deterministic counter-based uniform draws; identical across platforms.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed);
  double uniform();             // [0, 1)
  double normal();              // standard normal (Box-Muller)

 private:
  std::uint64_t next_u64();
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class MessageOutcome { kDelivered, kLost, kBlackout };

struct MessageRecord {
  double send_time = 0.0;
  double deliver_time = 0.0;  // meaningful for delivered messages
  int edge = 0;               // 0-based
  int from = 0, to = 0;       // agent ids
  MessageOutcome outcome = MessageOutcome::kDelivered;
};

/// Broadcast network over the graph edges: every tick each edge carries one
/// position message per direction, dropped by a seeded Bernoulli draw or a
/// blackout window and otherwise delivered after the fixed delay. Outcomes
/// are deterministic given the seed.
class NetworkSim {
 public:
  NetworkSim(const NetworkModel& model, const FormationGraph& graph,
             std::uint64_t seed);

  /// Emits the broadcasts of one tick. Positions are indexed by agent id-1.
  void tick(double now, std::span<const Eigen::Vector2d> positions);

  struct Delivery {
    int edge = 0;
    int from = 0, to = 0;
    NeighborSnapshot snapshot;
  };

  /// Pops messages whose delivery time has been reached.
  std::vector<Delivery> collect_due(double now);

  const std::vector<MessageRecord>& log() const { return log_; }

 private:
  NetworkModel model_;
  FormationGraph graph_;
  DeterministicRng rng_;
  std::deque<Delivery> pending_;
  std::vector<MessageRecord> log_;
};

struct AgentSample {
  double t = 0.0;
  int agent = 0;
  double x = 0.0, y = 0.0;
  double psi = 0.0;
  double e = 0.0;      // path error for the assigned level set
  double theta = 0.0;  // travel-aligned phase
  double u_r = 0.0;
  double c = 0.0;
  double u_psi = 0.0;
  double bank = 0.0;
};

struct EdgeSample {
  double t = 0.0;
  int agent = 0;
  int edge = 0;          // 1-based in outputs, 0-based here
  double e_theta = 0.0;  // the agent's local estimate
  double staleness = 0.0;  // seconds since snapshot, -1 if never received
};

struct SimTrace {
  double dt = 0.0;
  int trace_every = 1;
  int agent_count = 0;
  int edge_count = 0;
  std::vector<AgentSample> agents;      // step-major, agent-minor
  std::vector<EdgeSample> edge_errors;  // step-major
  std::vector<MessageRecord> messages;
  std::vector<std::string> notes;  // zero-field holds and similar events

  double sample_dt() const { return dt * trace_every; }
};

/// Runs a validated scenario: broadcasts and controller updates at the
/// network tick rate, guidance and integration at the dynamics rate.
/// Bit-identical traces for identical config and seed.
SimTrace run_scenario(const ScenarioConfig& config);

/// Initial state of one agent per its placement.
AgentState initial_state(const ScenarioConfig& config, const AgentInit& agent);

}  // namespace circform
