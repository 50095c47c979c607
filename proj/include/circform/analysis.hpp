// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include "circform/formation_control.hpp"
#include "circform/scenario.hpp"
#include "circform/sim.hpp"

namespace circform {

/// Linearized inter-vehicle error dynamics around the target formation:
/// eps' = (speed * k_r / r^2) * A with A = -B^T B.
struct LinearizedFormation {
  Eigen::MatrixXd system_matrix;
  Eigen::VectorXd eigenvalues;  // ascending, all strictly negative on trees
};

/// Builds the linearization for a common vehicle speed. Rejects cyclic
/// graphs, where the Hurwitz guarantee is void.
LinearizedFormation linearize(const FormationSpec& spec, double speed);

/// Worst-case commandable distance from the center:
/// r + pi * k_r * max_degree. Holds for every communication state because
/// the radius command is bounded by construction.
double predicted_confinement(const FormationSpec& spec);

struct ExponentialFit {
  double amplitude = 0.0;  // a in a*exp(-b t)
  double rate = 0.0;       // b, 1/s
  double r_squared = 0.0;
  int samples = 0;
  bool accepted = false;
  std::string diagnostic;
};

/// Log-linear least squares of |value| ~ a*exp(-b t). Non-decaying data is
/// rejected with a diagnostic instead of producing a fabricated rate.
ExponentialFit fit_exponential(std::span<const double> times,
                               std::span<const double> values);

struct FitWindow {
  double t_begin = -1.0;  // negative: auto (skip two network periods)
  double t_end = -1.0;    // negative: end of trace
  double linearity_threshold = 0.3;  // rad; larger errors void the fit
};

struct EdgeSeries {
  int edge = 0;  // 0-based
  std::vector<double> t;
  std::vector<double> e;  // rad, wrapped
};

/// Omniscient per-edge formation errors recomputed from the traced phases.
std::vector<EdgeSeries> true_edge_errors(const SimTrace& trace,
                                         const FormationSpec& spec);

struct ConvergenceReport {
  struct EdgeReport {
    int edge = 0;  // 0-based
    ExponentialFit fit;
    double settle_time = -1.0;  // s; negative when never settled
    bool settled = false;
    bool held_to_end = false;
  };
  std::vector<EdgeReport> edges;

  double slowest_rate = 0.0;  // smallest accepted decay rate
  bool has_rate = false;

  double initial_max_error = 0.0;  // rad, over true edge errors
  double half_error_time = -1.0;   // s; negative when never halved
  bool halved = false;

  double max_radius = 0.0;           // max |p - center| over the run
  double predicted_confinement = 0.0;
  double tracking_overshoot = 0.0;   // max(0, max_radius - predicted)

  double max_path_error = 0.0;       // max |e|, whole run
  double max_path_error_post = 0.0;  // sustained |e| after the initial fifth
                                     // (one-sample spikes at level jumps
                                     // are excluded)
  double max_level_step = 0.0;       // largest commanded level jump
  double relaxed_path_error = 0.0;   // worst |e| right before a new command
  bool slow_fast_ok = true;          // errors relax between commands

  double band_rad = 0.0;
  double dwell_s = 0.0;
  std::vector<std::string> notes;
};

inline constexpr double kSettleBandDeg = 10.0;
inline constexpr double kSettleDwellS = 60.0;

/// Full offline analysis of a trace: per-edge decay fits in the window,
/// settling against the +-10 degree band with a 60 s dwell (settling uses
/// the agents' own local estimates; fits use the omniscient errors),
/// confinement and path-error statistics.
ConvergenceReport analyze_trace(const SimTrace& trace,
                                const ScenarioConfig& config,
                                const FitWindow& window = {});

}  // namespace circform
