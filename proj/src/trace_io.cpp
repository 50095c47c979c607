// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace circform {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ostream& out, std::uint64_t hash) {
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  out << "# circform-trace v" << kSchemaVersion << "\n";
  out << "# config_hash " << hex << "\n";
}

const char* outcome_name(MessageOutcome o) {
  switch (o) {
    case MessageOutcome::kDelivered: return "delivered";
    case MessageOutcome::kLost: return "lost";
    case MessageOutcome::kBlackout: return "blackout";
  }
  return "?";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double to_double(const std::string& s, const std::string& file, int line_no) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(file + " line " + std::to_string(line_no) +
                          ": bad number '" + s + "'");
  }
}

}  // namespace

void write_trace_csv(std::ostream& out, const SimTrace& trace,
                     std::uint64_t hash) {
  write_header(out, hash);
  out << "t,agent,x,y,psi,e,theta,u_r,c,u_psi,bank\n";
  for (const auto& s : trace.agents) {
    out << format_double(s.t) << ',' << s.agent << ',' << format_double(s.x)
        << ',' << format_double(s.y) << ',' << format_double(s.psi) << ','
        << format_double(s.e) << ',' << format_double(s.theta) << ','
        << format_double(s.u_r) << ',' << format_double(s.c) << ','
        << format_double(s.u_psi) << ',' << format_double(s.bank) << '\n';
  }
}

void write_local_errors_csv(std::ostream& out, const SimTrace& trace,
                            std::uint64_t hash) {
  write_header(out, hash);
  out << "t,agent,edge,e_theta,stale\n";
  for (const auto& s : trace.edge_errors) {
    out << format_double(s.t) << ',' << s.agent << ',' << s.edge + 1 << ','
        << format_double(s.e_theta) << ',' << format_double(s.staleness)
        << '\n';
  }
}

void write_messages_csv(std::ostream& out, const SimTrace& trace,
                        std::uint64_t hash) {
  write_header(out, hash);
  out << "t_send,t_deliver,edge,from,to,outcome\n";
  for (const auto& msg : trace.messages) {
    out << format_double(msg.send_time) << ','
        << (msg.outcome == MessageOutcome::kDelivered
                ? format_double(msg.deliver_time)
                : std::string("-1"))
        << ',' << msg.edge + 1 << ',' << msg.from << ',' << msg.to << ','
        << outcome_name(msg.outcome) << '\n';
  }
}

std::string summary_json(const ScenarioConfig& config, const SimTrace& trace,
                         const ConvergenceReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  j["config_hash"] = hex;
  j["seed"] = config.seed;
  j["agents"] = trace.agent_count;
  j["edges"] = trace.edge_count;
  j["duration"] = config.duration;
  j["band_deg"] = rad_to_deg(report.band_rad);
  j["dwell_s"] = report.dwell_s;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : report.edges) {
    nlohmann::ordered_json je;
    je["edge"] = e.edge + 1;
    je["settled"] = e.settled;
    je["settle_time_s"] = e.settle_time;
    je["held_to_end"] = e.held_to_end;
    je["fit_accepted"] = e.fit.accepted;
    je["fit_rate_per_s"] = e.fit.rate;
    je["fit_r_squared"] = e.fit.r_squared;
    if (!e.fit.diagnostic.empty()) je["fit_diagnostic"] = e.fit.diagnostic;
    edges.push_back(je);
  }
  j["edge_reports"] = edges;
  j["slowest_rate_per_s"] = report.has_rate ? report.slowest_rate : 0.0;
  j["has_rate"] = report.has_rate;
  j["initial_max_error_rad"] = report.initial_max_error;
  j["half_error_time_s"] = report.half_error_time;
  j["max_radius_m"] = report.max_radius;
  j["predicted_confinement_m"] = report.predicted_confinement;
  j["tracking_overshoot_m"] = report.tracking_overshoot;
  j["max_path_error"] = report.max_path_error;
  j["max_path_error_post"] = report.max_path_error_post;
  j["max_level_step"] = report.max_level_step;
  j["slow_fast_ok"] = report.slow_fast_ok;
  j["notes"] = report.notes;
  j["sim_notes"] = trace.notes;
  return j.dump(2) + "\n";
}

void write_run_outputs(const std::string& dir, const ScenarioConfig& config,
                       const SimTrace& trace, const ConvergenceReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::uint64_t hash = config_hash(config);
  {
    std::ofstream out(fs::path(dir) / "trace.csv");
    write_trace_csv(out, trace, hash);
  }
  {
    std::ofstream out(fs::path(dir) / "local_errors.csv");
    write_local_errors_csv(out, trace, hash);
  }
  {
    std::ofstream out(fs::path(dir) / "messages.csv");
    write_messages_csv(out, trace, hash);
  }
  {
    std::ofstream out(fs::path(dir) / "summary.json");
    out << summary_json(config, trace, report);
  }
  {
    std::ofstream out(fs::path(dir) / "resolved_config.cfg");
    out << serialize_scenario(config);
  }
}

SimTrace read_trace_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  SimTrace trace;
  const auto read_file = [](const fs::path& path, size_t columns,
                            auto&& on_row) {
    std::ifstream in(path);
    if (!in) {
      throw ValidationError("cannot open trace file '" + path.string() + "'");
    }
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      if (!saw_header) {
        saw_header = true;  // column header row
        continue;
      }
      const auto fields = split_csv(line);
      if (fields.size() != columns) {
        throw ValidationError(path.string() + " line " +
                              std::to_string(line_no) +
                              ": truncated row (expected " +
                              std::to_string(columns) + " fields, got " +
                              std::to_string(fields.size()) + ")");
      }
      on_row(fields, line_no);
    }
    if (!saw_header) {
      throw ValidationError(path.string() + ": missing header row");
    }
  };

  const fs::path trace_path = fs::path(dir) / "trace.csv";
  read_file(trace_path, 11, [&](const std::vector<std::string>& f, int ln) {
    const std::string name = trace_path.string();
    AgentSample s;
    s.t = to_double(f[0], name, ln);
    s.agent = static_cast<int>(to_double(f[1], name, ln));
    s.x = to_double(f[2], name, ln);
    s.y = to_double(f[3], name, ln);
    s.psi = to_double(f[4], name, ln);
    s.e = to_double(f[5], name, ln);
    s.theta = to_double(f[6], name, ln);
    s.u_r = to_double(f[7], name, ln);
    s.c = to_double(f[8], name, ln);
    s.u_psi = to_double(f[9], name, ln);
    s.bank = to_double(f[10], name, ln);
    trace.agents.push_back(s);
    trace.agent_count = std::max(trace.agent_count, s.agent);
  });

  const fs::path errors_path = fs::path(dir) / "local_errors.csv";
  if (fs::exists(errors_path)) {
    read_file(errors_path, 5, [&](const std::vector<std::string>& f, int ln) {
      const std::string name = errors_path.string();
      EdgeSample s;
      s.t = to_double(f[0], name, ln);
      s.agent = static_cast<int>(to_double(f[1], name, ln));
      s.edge = static_cast<int>(to_double(f[2], name, ln)) - 1;
      s.e_theta = to_double(f[3], name, ln);
      s.staleness = to_double(f[4], name, ln);
      trace.edge_errors.push_back(s);
      trace.edge_count = std::max(trace.edge_count, s.edge + 1);
    });
  }

  // Reconstruct the sampling period from the first two distinct times.
  for (size_t i = 1; i < trace.agents.size(); ++i) {
    if (trace.agents[i].t > trace.agents[0].t) {
      trace.dt = trace.agents[i].t - trace.agents[0].t;
      break;
    }
  }
  trace.trace_every = 1;
  return trace;
}

}  // namespace circform
