// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace circform {

LinearizedFormation linearize(const FormationSpec& spec, double speed) {
  validate(spec.graph);
  if (!is_acyclic(spec.graph)) {
    throw ValidationError(
        "linearize: cyclic graph, the consensus matrix is not Hurwitz");
  }
  if (!(speed > 0.0)) {
    throw ValidationError("linearize: speed must be positive");
  }
  if (!(spec.target_radius > 0.0)) {
    throw ValidationError("linearize: target radius must be positive");
  }
  const double scale =
      speed * spec.gain / (spec.target_radius * spec.target_radius);
  LinearizedFormation out;
  out.system_matrix = scale * consensus_matrix(spec.graph).cast<double>();
  if (out.system_matrix.size() == 0) {
    out.eigenvalues = Eigen::VectorXd(0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.system_matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("linearize: eigensolver did not converge");
  }
  out.eigenvalues = solver.eigenvalues();
  return out;
}

double predicted_confinement(const FormationSpec& spec) {
  return spec.target_radius + kPi * spec.gain * max_degree(spec.graph);
}

ExponentialFit fit_exponential(std::span<const double> times,
                               std::span<const double> values) {
  ExponentialFit fit;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  const double floor = std::max(1e-14, 1e-9 * vmax);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (size_t i = 0; i < times.size(); ++i) {
    const double v = std::abs(values[i]);
    if (v <= floor) continue;
    const double x = times[i];
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  fit.samples = n;
  if (n < 8) {
    fit.diagnostic = "too few usable samples (" + std::to_string(n) + ")";
    return fit;
  }
  const double det = n * sxx - sx * sx;
  if (det <= 0.0) {
    fit.diagnostic = "degenerate time axis";
    return fit;
  }
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res =
      std::max(0.0, ss_tot - slope * (sxy - sx * sy / n));
  fit.rate = -slope;
  fit.amplitude = std::exp(intercept);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (!(fit.rate > 0.0)) {
    fit.diagnostic = "non-decaying data (fitted rate " +
                     std::to_string(fit.rate) + " <= 0)";
    return fit;
  }
  fit.accepted = true;
  return fit;
}

std::vector<EdgeSeries> true_edge_errors(const SimTrace& trace,
                                         const FormationSpec& spec) {
  const int n = trace.agent_count;
  const int m = spec.graph.edge_count();
  std::vector<EdgeSeries> out(m);
  for (int k = 0; k < m; ++k) out[k].edge = k;
  if (n == 0 || m == 0) return out;
  // Samples are step-major with one row per agent.
  const size_t rows = trace.agents.size();
  for (size_t base = 0; base + n <= rows; base += n) {
    const double t = trace.agents[base].t;
    for (int k = 0; k < m; ++k) {
      const auto [tail, head] = spec.graph.edges[k];
      const double z = inter_vehicle_angle(trace.agents[base + tail - 1].theta,
                                           trace.agents[base + head - 1].theta);
      out[k].t.push_back(t);
      out[k].e.push_back(wrap_pi(z - spec.desired_angles[k]));
    }
  }
  return out;
}

namespace {

struct BandSeries {
  std::vector<double> t;
  std::vector<double> worst;  // max |local estimate| across observers
};

// Per edge, the worst local estimate over both endpoint agents at each
// sampled step. Never-received components count as unbounded.
std::vector<BandSeries> local_band_series(const SimTrace& trace) {
  std::vector<BandSeries> series(trace.edge_count);
  // edge_errors rows are ordered by step; accumulate per (t, edge).
  size_t i = 0;
  while (i < trace.edge_errors.size()) {
    const double t = trace.edge_errors[i].t;
    std::vector<double> worst(trace.edge_count, 0.0);
    while (i < trace.edge_errors.size() && trace.edge_errors[i].t == t) {
      const auto& row = trace.edge_errors[i];
      const double mag = row.staleness < 0.0
                             ? std::numeric_limits<double>::infinity()
                             : std::abs(row.e_theta);
      worst[row.edge] = std::max(worst[row.edge], mag);
      ++i;
    }
    for (int k = 0; k < trace.edge_count; ++k) {
      series[k].t.push_back(t);
      series[k].worst.push_back(worst[k]);
    }
  }
  return series;
}

struct Settling {
  double settle_time = -1.0;
  bool settled = false;
  bool held_to_end = false;
};

Settling settle_from_series(const BandSeries& s, double band, double dwell) {
  Settling out;
  const size_t n = s.t.size();
  if (n == 0) return out;
  // next_out[i]: first index >= i with the series outside the band.
  std::vector<size_t> next_out(n + 1, n);
  for (size_t i = n; i-- > 0;) {
    next_out[i] = s.worst[i] > band ? i : next_out[i + 1];
  }
  for (size_t i = 0; i < n; ++i) {
    if (s.worst[i] > band) continue;
    const size_t run_end = next_out[i];  // exclusive
    const double held = s.t[run_end - 1] - s.t[i];
    if (held >= dwell) {
      out.settled = true;
      out.settle_time = s.t[i];
      out.held_to_end = run_end == n;
      return out;
    }
  }
  return out;
}

}  // namespace

ConvergenceReport analyze_trace(const SimTrace& trace,
                                const ScenarioConfig& config,
                                const FitWindow& window) {
  ConvergenceReport report;
  report.band_rad = deg_to_rad(kSettleBandDeg);
  report.dwell_s = kSettleDwellS;

  const FormationSpec spec = make_formation_spec(config);
  const int m = spec.graph.edge_count();

  const double t_last =
      trace.agents.empty() ? 0.0 : trace.agents.back().t;
  const double t0 = window.t_begin >= 0.0 ? window.t_begin
                                          : 2.0 * config.network.period;
  const double t1 = window.t_end >= 0.0 ? window.t_end : t_last;

  // Per-edge decay fits on the omniscient errors.
  const auto series = true_edge_errors(trace, spec);
  const auto band = local_band_series(trace);
  report.edges.resize(m);
  report.slowest_rate = std::numeric_limits<double>::infinity();
  for (int k = 0; k < m; ++k) {
    auto& edge_report = report.edges[k];
    edge_report.edge = k;
    std::vector<double> ts, es;
    double max_abs = 0.0;
    for (size_t i = 0; i < series[k].t.size(); ++i) {
      if (series[k].t[i] < t0 || series[k].t[i] > t1) continue;
      ts.push_back(series[k].t[i]);
      es.push_back(series[k].e[i]);
      max_abs = std::max(max_abs, std::abs(series[k].e[i]));
    }
    edge_report.fit = fit_exponential(ts, es);
    if (max_abs > window.linearity_threshold) {
      edge_report.fit.accepted = false;
      edge_report.fit.diagnostic =
          "outside the linear regime (max |e_theta| = " +
          std::to_string(max_abs) + " rad in the fit window)";
    }
    if (edge_report.fit.accepted) {
      report.slowest_rate = std::min(report.slowest_rate, edge_report.fit.rate);
      report.has_rate = true;
    }
    if (k < static_cast<int>(band.size())) {
      const Settling s =
          settle_from_series(band[k], report.band_rad, report.dwell_s);
      edge_report.settle_time = s.settle_time;
      edge_report.settled = s.settled;
      edge_report.held_to_end = s.held_to_end;
    }
  }
  if (!report.has_rate) report.slowest_rate = 0.0;

  // Half-error time of the catch-up phase, on the omniscient errors.
  if (m > 0 && !series[0].t.empty()) {
    double m0 = 0.0;
    for (int k = 0; k < m; ++k) m0 = std::max(m0, std::abs(series[k].e[0]));
    report.initial_max_error = m0;
    for (size_t i = 0; i < series[0].t.size(); ++i) {
      double mt = 0.0;
      for (int k = 0; k < m; ++k) mt = std::max(mt, std::abs(series[k].e[i]));
      if (mt <= 0.5 * m0) {
        report.half_error_time = series[0].t[i];
        report.halved = true;
        break;
      }
    }
  }

  // Confinement and path-error statistics.
  report.predicted_confinement =
      config.path.kind == PathKind::kCircle ? predicted_confinement(spec) : 0.0;
  const double post_t = 0.2 * t_last;
  std::vector<double> prev_level(trace.agent_count,
                                 std::numeric_limits<double>::quiet_NaN());
  std::vector<double> prev_abs_e(trace.agent_count,
                                 std::numeric_limits<double>::quiet_NaN());
  for (const auto& row : trace.agents) {
    const Eigen::Vector2d p{row.x, row.y};
    report.max_radius =
        std::max(report.max_radius, (p - config.path.center).norm());
    report.max_path_error = std::max(report.max_path_error, std::abs(row.e));
    // Sustained path error: the sample taken right at a level reassignment
    // carries the full commanded jump by construction, so a deviation only
    // counts when it survives into the next sample.
    double& prev_e = prev_abs_e[row.agent - 1];
    if (row.t >= post_t && !std::isnan(prev_e)) {
      report.max_path_error_post = std::max(
          report.max_path_error_post, std::min(prev_e, std::abs(row.e)));
    }
    double& prev = prev_level[row.agent - 1];
    if (!std::isnan(prev) && row.c != prev) {
      report.max_level_step =
          std::max(report.max_level_step, std::abs(row.c - prev));
      // The error just before a new command lands tells whether the vehicle
      // had finished riding onto the previous level set. The initial
      // capture of the very first command is start-up, not regime.
      if (row.t >= post_t) {
        report.relaxed_path_error =
            std::max(report.relaxed_path_error, prev_e);
      }
    }
    prev_e = std::abs(row.e);
    prev = row.c;
  }
  report.tracking_overshoot =
      config.path.kind == PathKind::kCircle
          ? std::max(0.0, report.max_radius - report.predicted_confinement)
          : 0.0;
  if (report.max_level_step > 0.0) {
    report.slow_fast_ok =
        report.relaxed_path_error <= 0.1 * report.max_level_step;
    if (!report.slow_fast_ok) {
      report.notes.push_back(
          "path error has not relaxed below 10% of the commanded level "
          "jumps when new commands arrive; the riding-the-level-set regime "
          "does not hold for this run");
    }
  }
  return report;
}

}  // namespace circform
