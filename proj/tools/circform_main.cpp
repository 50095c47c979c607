// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0
//
// circform: deterministic simulator and analysis toolkit for circular
// formations of constant-speed vehicles. See README.md for the config
// schema and output formats.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "circform/analysis.hpp"
#include "circform/scenario.hpp"
#include "circform/sim.hpp"
#include "circform/trace_io.hpp"

namespace fs = std::filesystem;
using namespace circform;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDegeneracy = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  std::int64_t seed = -1;
};

std::vector<std::pair<std::string, std::string>> parse_sets(
    const std::vector<std::string>& sets, std::int64_t seed) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--set expects key=value, got '" + kv + "'");
    }
    std::string value = kv.substr(eq + 1);
    for (auto& ch : value) {
      if (ch == ',') ch = ' ';  // multi-value keys use commas on the CLI
    }
    overrides.emplace_back(kv.substr(0, eq), value);
  }
  if (seed >= 0) {
    overrides.emplace_back("seed", std::to_string(seed));
  }
  return overrides;
}

std::string read_config_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ScenarioConfig load_with_overrides(const CommonOptions& opt) {
  const std::string text = apply_overrides(
      read_config_text(opt.config_path), parse_sets(opt.sets, opt.seed));
  return parse_scenario(text);
}

void print_hash_line(const ScenarioConfig& config) {
  std::printf("schema_version %d\n", kSchemaVersion);
  std::printf("config_hash %016llx\n",
              static_cast<unsigned long long>(config_hash(config)));
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
}

int cmd_graph_check(const CommonOptions& opt) {
  const auto config = load_with_overrides(opt);
  validate(config.graph);
  const auto b = incidence_matrix(config.graph);
  const auto a = consensus_matrix(config.graph);
  const bool acyclic = is_acyclic(config.graph);
  const bool connected = is_connected(config.graph);
  const auto report = verify_hurwitz(a);

  std::cout << "graph: " << config.graph.vertex_count << " vertices, "
            << config.graph.edge_count() << " edges\n";
  std::cout << "incidence matrix B:\n" << b << "\n";
  std::cout << "consensus matrix A = -B^T B:\n" << a << "\n";
  std::cout << "eigenvalues of A:";
  for (int i = 0; i < report.eigenvalues.size(); ++i) {
    std::cout << " " << report.eigenvalues(i);
  }
  std::cout << "\n";
  std::cout << (acyclic ? "acyclic" : "cyclic") << ", "
            << (connected ? "connected" : "disconnected") << ", "
            << (report.is_hurwitz ? "Hurwitz" : "not Hurwitz") << "\n";
  if (!connected) {
    std::fprintf(stderr,
                 "warning: graph is disconnected; convergence holds per "
                 "component only\n");
  }
  std::cout << "\n";
  print_hash_line(config);
  for (int v = 0; v < b.rows(); ++v) {
    std::cout << "B";
    for (int k = 0; k < b.cols(); ++k) std::cout << " " << b(v, k);
    std::cout << "\n";
  }
  for (int i = 0; i < a.rows(); ++i) {
    std::cout << "A";
    for (int k = 0; k < a.cols(); ++k) std::cout << " " << a(i, k);
    std::cout << "\n";
  }
  std::cout << "EIG";
  for (int i = 0; i < report.eigenvalues.size(); ++i) {
    std::cout << " " << format_double(report.eigenvalues(i));
  }
  std::cout << "\n";
  std::cout << "max_eigenvalue " << format_double(report.max_real_eigenvalue)
            << "\n";
  std::cout << "acyclic " << acyclic << "\n";
  std::cout << "connected " << connected << "\n";
  std::cout << "hurwitz " << report.is_hurwitz << "\n";
  return 0;
}

double common_speed(const ScenarioConfig& config) {
  double sum = 0.0, lo = 1e300, hi = 0.0;
  for (const auto& a : config.agents) {
    sum += a.speed;
    lo = std::min(lo, a.speed);
    hi = std::max(hi, a.speed);
  }
  const double mean = sum / static_cast<double>(config.agents.size());
  if (hi - lo > 1e-12 * hi) {
    std::fprintf(stderr,
                 "warning: agents fly at different speeds; using the mean "
                 "%.6g m/s for the linearization\n",
                 mean);
  }
  return mean;
}

int cmd_linearize(const CommonOptions& opt, double speed_override) {
  const auto config = load_with_overrides(opt);
  print_warnings(validate_scenario(config));
  const auto spec = make_formation_spec(config);
  const double speed =
      speed_override > 0.0 ? speed_override : common_speed(config);
  const auto lin = linearize(spec, speed);

  std::cout << "system matrix (speed * k_r / r^2) * A at speed "
            << format_double(speed) << " m/s:\n"
            << lin.system_matrix << "\n";
  std::cout << "eigenvalues (1/s):";
  for (int i = 0; i < lin.eigenvalues.size(); ++i) {
    std::cout << " " << lin.eigenvalues(i);
  }
  std::cout << "\n\n";
  print_hash_line(config);
  for (int i = 0; i < lin.system_matrix.rows(); ++i) {
    std::cout << "M";
    for (int k = 0; k < lin.system_matrix.cols(); ++k) {
      std::cout << " " << format_double(lin.system_matrix(i, k));
    }
    std::cout << "\n";
  }
  std::cout << "EIG";
  for (int i = 0; i < lin.eigenvalues.size(); ++i) {
    std::cout << " " << format_double(lin.eigenvalues(i));
  }
  std::cout << "\n";
  if (lin.eigenvalues.size() > 0) {
    std::cout << "slowest_rate " << format_double(-lin.eigenvalues.maxCoeff())
              << "\n";
  }
  std::cout << "speed " << format_double(speed) << "\n";
  return 0;
}

int cmd_confinement(const CommonOptions& opt) {
  const auto config = load_with_overrides(opt);
  print_warnings(validate_scenario(config));
  const auto spec = make_formation_spec(config);
  const double radius = predicted_confinement(spec);
  std::cout << "worst-case commanded radius: " << radius
            << " m (r = " << spec.target_radius << " m, k_r = " << spec.gain
            << ", max degree = " << max_degree(spec.graph) << ")\n\n";
  print_hash_line(config);
  std::cout << "predicted_confinement_m " << format_double(radius) << "\n";
  return 0;
}

void print_report(const ConvergenceReport& report) {
  for (const auto& e : report.edges) {
    std::cout << "edge " << e.edge + 1 << ": ";
    if (e.settled) {
      std::cout << "settled at " << e.settle_time << " s"
                << (e.held_to_end ? " (held to end)" : "");
    } else {
      std::cout << "not settled";
    }
    if (e.fit.accepted) {
      std::cout << ", decay rate " << e.fit.rate << " 1/s (R^2 "
                << e.fit.r_squared << ")";
    } else if (!e.fit.diagnostic.empty()) {
      std::cout << ", fit rejected: " << e.fit.diagnostic;
    }
    std::cout << "\n";
  }
  if (report.has_rate) {
    std::cout << "slowest fitted rate: " << report.slowest_rate << " 1/s\n";
  }
  if (report.initial_max_error > 0.0) {
    std::cout << "half-error time: ";
    if (report.halved) {
      std::cout << report.half_error_time << " s (from "
                << rad_to_deg(report.initial_max_error) << " deg)\n";
    } else {
      std::cout << "not reached\n";
    }
  }
  std::cout << "max |p|: " << report.max_radius
            << " m, predicted confinement: " << report.predicted_confinement
            << " m, overshoot: " << report.tracking_overshoot << " m\n";
  std::cout << "max path error: " << report.max_path_error
            << " (sustained post-transient: " << report.max_path_error_post
            << ")\n";
  for (const auto& n : report.notes) {
    std::cout << "note: " << n << "\n";
  }
}

void print_report_rows(const ScenarioConfig& config,
                       const ConvergenceReport& report) {
  print_hash_line(config);
  for (const auto& e : report.edges) {
    std::cout << "EDGE " << e.edge + 1 << " settled " << e.settled
              << " settle_time " << format_double(e.settle_time)
              << " held_to_end " << e.held_to_end << " rate "
              << format_double(e.fit.rate) << " r2 "
              << format_double(e.fit.r_squared) << " accepted "
              << e.fit.accepted << "\n";
  }
  std::cout << "slowest_rate " << format_double(report.slowest_rate) << "\n";
  std::cout << "half_error_time " << format_double(report.half_error_time)
            << "\n";
  std::cout << "max_radius " << format_double(report.max_radius) << "\n";
  std::cout << "predicted_confinement "
            << format_double(report.predicted_confinement) << "\n";
  std::cout << "tracking_overshoot "
            << format_double(report.tracking_overshoot) << "\n";
  std::cout << "max_path_error " << format_double(report.max_path_error)
            << "\n";
  std::cout << "slow_fast_ok " << report.slow_fast_ok << "\n";
}

int cmd_simulate(const CommonOptions& opt) {
  const auto config = load_with_overrides(opt);
  const auto warnings = validate_scenario(config);
  print_warnings(warnings);
  const auto trace = run_scenario(config);
  const auto report = analyze_trace(trace, config);
  const std::string dir = opt.out_dir.empty() ? "run_out" : opt.out_dir;
  write_run_outputs(dir, config, trace, report);
  std::cout << "wrote " << dir
            << "/{trace.csv, local_errors.csv, messages.csv, summary.json, "
               "resolved_config.cfg}\n";
  print_report(report);
  print_report_rows(config, report);
  return 0;
}

int cmd_metrics(const CommonOptions& opt, const std::string& trace_dir,
                double t0, double t1) {
  const auto config = load_with_overrides(opt);
  print_warnings(validate_scenario(config));
  const auto trace = read_trace_dir(trace_dir);
  FitWindow window;
  window.t_begin = t0;
  window.t_end = t1;
  const auto report = analyze_trace(trace, config, window);
  print_report(report);
  print_report_rows(config, report);
  return 0;
}

int cmd_plotdata(const CommonOptions& opt, const std::string& trace_dir,
                 int max_points) {
  const auto config = load_with_overrides(opt);
  const auto spec = make_formation_spec(config);
  const auto trace = read_trace_dir(trace_dir);
  const std::string dir = opt.out_dir.empty() ? trace_dir : opt.out_dir;
  fs::create_directories(dir);
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));

  const auto stride = [max_points](size_t n) {
    return std::max<size_t>(1, n / static_cast<size_t>(max_points));
  };

  {
    // Local error estimates in degrees with the settling band.
    std::ofstream out(fs::path(dir) / "plot_errors.csv");
    out << "# circform-plot v" << kSchemaVersion << "\n";
    out << "# config_hash " << hex << "\n";
    out << "t,agent,edge,e_theta_deg,band_lo_deg,band_hi_deg\n";
    const size_t step = stride(trace.edge_errors.size());
    for (size_t i = 0; i < trace.edge_errors.size(); i += step) {
      const auto& row = trace.edge_errors[i];
      if (row.staleness < 0.0) continue;  // nothing received yet
      out << format_double(row.t) << ',' << row.agent << ',' << row.edge + 1
          << ',' << format_double(rad_to_deg(row.e_theta)) << ",-"
          << kSettleBandDeg << ',' << kSettleBandDeg << "\n";
    }
  }
  {
    std::ofstream out(fs::path(dir) / "plot_xy.csv");
    out << "# circform-plot v" << kSchemaVersion << "\n";
    out << "# config_hash " << hex << "\n";
    out << "t,agent,x,y\n";
    const size_t step = stride(trace.agents.size());
    for (size_t i = 0; i < trace.agents.size(); i += step) {
      const auto& row = trace.agents[i];
      out << format_double(row.t) << ',' << row.agent << ','
          << format_double(row.x) << ',' << format_double(row.y) << "\n";
    }
  }
  {
    // Reference curves: the target path and, for circles, the confinement
    // boundary.
    std::ofstream out(fs::path(dir) / "plot_reference.csv");
    out << "# circform-plot v" << kSchemaVersion << "\n";
    out << "# config_hash " << hex << "\n";
    out << "kind,x,y\n";
    const auto emit = [&](const char* kind, double a, double b) {
      for (int i = 0; i <= 256; ++i) {
        const double t = kTwoPi * i / 256.0;
        out << kind << ','
            << format_double(config.path.center.x() + a * std::cos(t)) << ','
            << format_double(config.path.center.y() + b * std::sin(t))
            << "\n";
      }
    };
    if (config.path.kind == PathKind::kCircle) {
      emit("target", config.path.radius, config.path.radius);
      const double d = predicted_confinement(spec);
      emit("confinement", d, d);
    } else {
      emit("target", config.path.semi_a, config.path.semi_b);
    }
  }
  {
    // Delivery gaps: stretches where a local estimate went stale for more
    // than two broadcast periods.
    std::ofstream out(fs::path(dir) / "plot_gaps.csv");
    out << "# circform-plot v" << kSchemaVersion << "\n";
    out << "# config_hash " << hex << "\n";
    out << "agent,edge,start,end\n";
    std::map<std::pair<int, int>, std::pair<double, double>> open_gap;
    for (const auto& row : trace.edge_errors) {
      const auto key = std::pair{row.agent, row.edge};
      const bool stale =
          row.staleness < 0.0 || row.staleness > 2.0 * config.network.period;
      auto it = open_gap.find(key);
      if (stale) {
        if (it == open_gap.end()) {
          open_gap[key] = {row.t, row.t};
        } else {
          it->second.second = row.t;
        }
      } else if (it != open_gap.end()) {
        out << key.first << ',' << key.second + 1 << ','
            << format_double(it->second.first) << ','
            << format_double(it->second.second) << "\n";
        open_gap.erase(it);
      }
    }
    for (const auto& [key, gap] : open_gap) {
      out << key.first << ',' << key.second + 1 << ','
          << format_double(gap.first) << ',' << format_double(gap.second)
          << "\n";
    }
  }
  std::cout << "wrote " << dir
            << "/{plot_errors.csv, plot_xy.csv, plot_reference.csv, "
               "plot_gaps.csv}\n";
  return 0;
}

struct SweepResult {
  std::string row;
  std::string status;
  std::string combo_label;
  bool ok = false;
  bool all_settled = false;
};

int cmd_sweep(const CommonOptions& opt, const std::vector<std::string>& grid,
              int seeds, int jobs) {
  const std::string base_text = apply_overrides(
      read_config_text(opt.config_path), parse_sets(opt.sets, opt.seed));

  struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
  };
  std::vector<SweepAxis> axes;
  for (const auto& g : grid) {
    const auto eq = g.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--grid expects key=v1,v2,..., got '" + g + "'");
    }
    SweepAxis axis;
    axis.key = g.substr(0, eq);
    std::stringstream ss(g.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) axis.values.push_back(item);
    }
    if (axis.values.empty()) {
      throw ValidationError("--grid axis '" + axis.key + "' has no values");
    }
    axes.push_back(axis);
  }

  std::vector<std::vector<std::pair<std::string, std::string>>> combos = {{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& combo : combos) {
      for (const auto& value : axis.values) {
        auto extended = combo;
        extended.emplace_back(axis.key, value);
        next.push_back(extended);
      }
    }
    combos = next;
  }

  std::string header;
  for (const auto& axis : axes) header += axis.key + ",";
  header +=
      "seed,status,all_settled,slowest_rate,half_error_time,max_radius,"
      "predicted_confinement,overshoot";

  struct Job {
    std::vector<std::pair<std::string, std::string>> combo;
    std::uint64_t seed = 0;
  };
  std::vector<Job> jobs_list;
  if (!axes.empty()) {
    for (const auto& combo : combos) {
      for (int s = 1; s <= seeds; ++s) {
        jobs_list.push_back({combo, static_cast<std::uint64_t>(s)});
      }
    }
  }

  const auto run_one = [&base_text](const Job& job) -> SweepResult {
    SweepResult result;
    std::string prefix;
    for (const auto& [key, value] : job.combo) {
      prefix += value + ",";
      result.combo_label += key + "=" + value + " ";
    }
    prefix += std::to_string(job.seed) + ",";
    try {
      auto overrides = job.combo;
      overrides.emplace_back("seed", std::to_string(job.seed));
      const auto config =
          parse_scenario(apply_overrides(base_text, overrides));
      validate_scenario(config);
      const auto trace = run_scenario(config);
      const auto report = analyze_trace(trace, config);
      bool all_settled = !report.edges.empty();
      for (const auto& e : report.edges) all_settled &= e.settled;
      result.row = prefix + "ok," + (all_settled ? "1" : "0") + "," +
                   format_double(report.slowest_rate) + "," +
                   format_double(report.half_error_time) + "," +
                   format_double(report.max_radius) + "," +
                   format_double(report.predicted_confinement) + "," +
                   format_double(report.tracking_overshoot);
      result.status = "ok";
      result.ok = true;
      result.all_settled = all_settled;
    } catch (const ValidationError& err) {
      result.row = prefix + "rejected,,,,,,";
      result.status = std::string("rejected: ") + err.what();
    } catch (const std::exception& err) {
      result.row = prefix + "failed,,,,,,";
      result.status = std::string("failed: ") + err.what();
    }
    return result;
  };

  std::vector<SweepResult> results(jobs_list.size());
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(jobs_list.size())));
  std::atomic<size_t> cursor{0};
  std::vector<std::future<void>> pool;
  for (int w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&]() {
      for (;;) {
        const size_t i = cursor.fetch_add(1);
        if (i >= jobs_list.size()) return;
        results[i] = run_one(jobs_list[i]);
      }
    }));
  }
  for (auto& f : pool) f.get();

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out_dir.empty()) {
    fs::create_directories(fs::path(opt.out_dir));
    file.open(fs::path(opt.out_dir) / "sweep.csv");
    out = &file;
  }
  *out << "# circform-sweep v" << kSchemaVersion << "\n";
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(
                    config_hash(parse_scenario(base_text))));
  *out << "# config_hash " << hex << "\n";
  *out << header << "\n";
  for (const auto& r : results) *out << r.row << "\n";
  if (!opt.out_dir.empty()) {
    std::cout << "wrote " << opt.out_dir << "/sweep.csv (" << results.size()
              << " runs)\n";
  }
  for (const auto& r : results) {
    if (r.status != "ok") std::fprintf(stderr, "run: %s\n", r.status.c_str());
  }
  // Aggregate per grid point: how many seeds settled.
  std::map<std::string, std::pair<int, int>> settled_by_combo;
  for (const auto& r : results) {
    if (!r.ok) continue;
    auto& [settled, total] = settled_by_combo[r.combo_label];
    settled += r.all_settled ? 1 : 0;
    ++total;
  }
  for (const auto& [label, counts] : settled_by_combo) {
    std::printf("%s: settled %d/%d\n", label.c_str(), counts.first,
                counts.second);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "circform: circular-formation guidance simulator and analysis "
      "toolkit"};
  app.require_subcommand(1);

  CommonOptions opt;
  double linearize_speed = -1.0;
  std::string trace_dir;
  double window_t0 = -1.0, window_t1 = -1.0;
  int max_points = 2000;
  std::vector<std::string> grid;
  int seeds = 1;
  int jobs = std::max(1u, std::thread::hardware_concurrency());

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "scenario config file")
        ->required();
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "override the scenario seed");
    cmd->add_option(
        "--set", opt.sets,
        "override a scalar config key, e.g. --set network.loss=0.5");
  };

  auto* simulate = app.add_subcommand("simulate", "run one scenario");
  add_common(simulate);

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
  add_common(sweep);
  sweep->add_option("--grid", grid,
                    "axis as key=v1,v2,... (repeatable; cartesian product)");
  sweep->add_option("--seeds", seeds, "number of seeds per grid point");
  sweep->add_option("--jobs", jobs, "parallel workers");

  auto* graph_check =
      app.add_subcommand("graph-check", "incidence and consensus analysis");
  add_common(graph_check);

  auto* lin =
      app.add_subcommand("linearize", "eigenvalues of the error linearization");
  add_common(lin);
  lin->add_option("--speed", linearize_speed, "vehicle speed (m/s)");

  auto* conf =
      app.add_subcommand("confinement", "worst-case confinement radius");
  add_common(conf);

  auto* metrics = app.add_subcommand("metrics", "analyze a recorded trace");
  add_common(metrics);
  metrics->add_option("--trace", trace_dir, "trace directory")->required();
  metrics->add_option("--window-begin", window_t0, "fit window start (s)");
  metrics->add_option("--window-end", window_t1, "fit window end (s)");

  auto* plotdata =
      app.add_subcommand("plotdata", "plot-ready series from a trace");
  add_common(plotdata);
  plotdata->add_option("--trace", trace_dir, "trace directory")->required();
  plotdata->add_option("--max-points", max_points,
                       "downsampling target per series");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (sweep->parsed()) return cmd_sweep(opt, grid, seeds, jobs);
    if (graph_check->parsed()) return cmd_graph_check(opt);
    if (lin->parsed()) return cmd_linearize(opt, linearize_speed);
    if (conf->parsed()) return cmd_confinement(opt);
    if (metrics->parsed())
      return cmd_metrics(opt, trace_dir, window_t0, window_t1);
    if (plotdata->parsed()) return cmd_plotdata(opt, trace_dir, max_points);
  } catch (const ValidationError& err) {
    std::fprintf(stderr, "validation error: %s\n", err.what());
    return kExitValidation;
  } catch (const DegeneracyError& err) {
    std::fprintf(stderr, "runtime degeneracy: %s\n", err.what());
    return kExitDegeneracy;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
