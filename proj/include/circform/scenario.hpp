// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "circform/formation_control.hpp"
#include "circform/formation_graph.hpp"
#include "circform/gvf.hpp"
#include "circform/implicit_path.hpp"

namespace circform {

inline constexpr int kSchemaVersion = 1;

struct PathConfig {
  PathKind kind = PathKind::kCircle;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;            // circle
  double semi_a = 0.0, semi_b = 0.0;  // ellipse
};

/// One simulated vehicle. Placement is either a phase on the target curve
/// (travel-aligned degrees, flying tangentially) or an explicit pose.
struct AgentInit {
  int id = 0;
  double speed = 0.0;  // m/s, constant for the whole run
  bool use_phase = true;
  double phase_deg = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double yaw_deg = 0.0;
  double initial_u_r = 0.0;   // radius offset held until the first message
  double initial_level = 0.0;  // direct level command (ellipse scenarios)
  bool has_initial_level = false;
};

struct NetworkModel {
  double period = 0.5;  // s between broadcasts (2 Hz)
  double loss = 0.0;    // per-message per-receiver drop probability
  double delay = 0.0;   // s, fixed
  std::vector<std::pair<double, double>> blackouts;  // [start, end] s
  double position_noise = 0.0;  // sigma of additive noise on payloads, m

  bool in_blackout(double t) const {
    for (const auto& [a, b] : blackouts) {
      if (t >= a && t <= b) return true;
    }
    return false;
  }
};

struct ScenarioConfig {
  PathConfig path;
  FormationGraph graph;
  std::vector<double> z_star_deg;  // per edge, travel-aligned degrees
  double k_r = 0.0;                // m/rad
  double k_e = 0.0;                // 1/m^2
  double k_d = 0.0;                // 1/s (at unit speed)
  double bank_limit_deg = 45.0;
  double gravity = kStandardGravity;
  Eigen::Vector2d wind = Eigen::Vector2d::Zero();
  NetworkModel network;
  double duration = 0.0;  // s
  double dt = 0.02;       // s
  int trace_every = 1;    // record every n-th step
  std::uint64_t seed = 0;
  std::vector<AgentInit> agents;
};

/// Parses the key-value scenario format. Unknown keys and malformed values
/// raise ValidationError with the offending line.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& file_path);

/// Canonical re-serialization; parsing it reproduces the config exactly.
std::string serialize_scenario(const ScenarioConfig& config);

/// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const ScenarioConfig& config);

/// Full cross-field validation (graph, gains, geometry, agents, network,
/// run parameters). Throws ValidationError; returns human-readable
/// warnings (disconnected graph, stiff-timestep hint, ...).
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Replaces (or appends) scalar `key value` lines in config text.
/// Repeatable keys (graph.edge, agent, network.blackout) cannot be
/// overridden this way.
std::string apply_overrides(
    std::string text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

ImplicitPathd make_path(const PathConfig& path);
FormationSpec make_formation_spec(const ScenarioConfig& config);

}  // namespace circform
