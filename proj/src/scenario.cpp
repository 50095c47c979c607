// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace circform {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok.front() == '#') break;  // trailing comment
    tokens.push_back(tok);
  }
  return tokens;
}

[[noreturn]] void fail(int line_no, const std::string& msg) {
  throw ValidationError("config line " + std::to_string(line_no) + ": " + msg);
}

double parse_double(const std::string& tok, int line_no) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(line_no, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) {
    fail(line_no, "trailing characters in number '" + tok + "'");
  }
  return v;
}

long long parse_int(const std::string& tok, int line_no) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    fail(line_no, "expected an integer, got '" + tok + "'");
  }
  if (used != tok.size()) {
    fail(line_no, "trailing characters in integer '" + tok + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void parse_agent_line(const std::vector<std::string>& t, int line_no,
                      ScenarioConfig* config) {
  if (t.size() < 2) fail(line_no, "agent line needs an id");
  AgentInit agent;
  agent.id = static_cast<int>(parse_int(t[1], line_no));
  bool have_speed = false, have_phase = false, have_x = false, have_y = false,
       have_yaw = false;
  for (size_t i = 2; i + 1 < t.size(); i += 2) {
    const std::string& key = t[i];
    const std::string& val = t[i + 1];
    if (key == "speed") {
      agent.speed = parse_double(val, line_no);
      have_speed = true;
    } else if (key == "phase_deg") {
      agent.phase_deg = parse_double(val, line_no);
      have_phase = true;
    } else if (key == "x") {
      agent.position.x() = parse_double(val, line_no);
      have_x = true;
    } else if (key == "y") {
      agent.position.y() = parse_double(val, line_no);
      have_y = true;
    } else if (key == "yaw_deg") {
      agent.yaw_deg = parse_double(val, line_no);
      have_yaw = true;
    } else if (key == "initial_u_r") {
      agent.initial_u_r = parse_double(val, line_no);
    } else if (key == "level") {
      agent.initial_level = parse_double(val, line_no);
      agent.has_initial_level = true;
    } else {
      fail(line_no, "unknown agent attribute '" + key + "'");
    }
  }
  if ((t.size() - 2) % 2 != 0) fail(line_no, "agent attributes come in pairs");
  if (!have_speed) fail(line_no, "agent needs a speed");
  if (have_phase) {
    if (have_x || have_y || have_yaw) {
      fail(line_no, "agent placement is either phase_deg or x/y/yaw_deg");
    }
    agent.use_phase = true;
  } else {
    if (!(have_x && have_y && have_yaw)) {
      fail(line_no, "pose placement needs x, y and yaw_deg");
    }
    agent.use_phase = false;
  }
  config->agents.push_back(agent);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_vertices = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = tokenize(line);
    if (t.empty()) continue;
    const std::string& key = t[0];
    const auto need = [&](size_t n) {
      if (t.size() != n + 1) {
        fail(line_no, "'" + key + "' expects " + std::to_string(n) +
                          " value(s)");
      }
    };
    if (key == "path.kind") {
      need(1);
      if (t[1] == "circle") {
        config.path.kind = PathKind::kCircle;
      } else if (t[1] == "ellipse") {
        config.path.kind = PathKind::kEllipse;
      } else {
        fail(line_no, "path.kind must be circle or ellipse");
      }
    } else if (key == "path.center") {
      need(2);
      config.path.center = {parse_double(t[1], line_no),
                            parse_double(t[2], line_no)};
    } else if (key == "path.radius") {
      need(1);
      config.path.radius = parse_double(t[1], line_no);
    } else if (key == "path.semi_a") {
      need(1);
      config.path.semi_a = parse_double(t[1], line_no);
    } else if (key == "path.semi_b") {
      need(1);
      config.path.semi_b = parse_double(t[1], line_no);
    } else if (key == "graph.vertices") {
      need(1);
      config.graph.vertex_count = static_cast<int>(parse_int(t[1], line_no));
      saw_vertices = true;
    } else if (key == "graph.edge") {
      need(2);
      config.graph.edges.emplace_back(
          static_cast<int>(parse_int(t[1], line_no)),
          static_cast<int>(parse_int(t[2], line_no)));
    } else if (key == "formation.z_star_deg") {
      config.z_star_deg.clear();
      for (size_t i = 1; i < t.size(); ++i) {
        config.z_star_deg.push_back(parse_double(t[i], line_no));
      }
    } else if (key == "formation.k_r") {
      need(1);
      config.k_r = parse_double(t[1], line_no);
    } else if (key == "gains.k_e") {
      need(1);
      config.k_e = parse_double(t[1], line_no);
    } else if (key == "gains.k_d") {
      need(1);
      config.k_d = parse_double(t[1], line_no);
    } else if (key == "limits.bank_deg") {
      need(1);
      config.bank_limit_deg = parse_double(t[1], line_no);
    } else if (key == "physics.gravity") {
      need(1);
      config.gravity = parse_double(t[1], line_no);
    } else if (key == "wind") {
      need(2);
      config.wind = {parse_double(t[1], line_no), parse_double(t[2], line_no)};
    } else if (key == "network.period") {
      need(1);
      config.network.period = parse_double(t[1], line_no);
    } else if (key == "network.loss") {
      need(1);
      config.network.loss = parse_double(t[1], line_no);
    } else if (key == "network.delay") {
      need(1);
      config.network.delay = parse_double(t[1], line_no);
    } else if (key == "network.blackout") {
      need(2);
      config.network.blackouts.emplace_back(parse_double(t[1], line_no),
                                            parse_double(t[2], line_no));
    } else if (key == "network.position_noise") {
      need(1);
      config.network.position_noise = parse_double(t[1], line_no);
    } else if (key == "run.duration") {
      need(1);
      config.duration = parse_double(t[1], line_no);
    } else if (key == "run.dt") {
      need(1);
      config.dt = parse_double(t[1], line_no);
    } else if (key == "run.trace_every") {
      need(1);
      config.trace_every = static_cast<int>(parse_int(t[1], line_no));
    } else if (key == "seed") {
      need(1);
      config.seed = static_cast<std::uint64_t>(parse_int(t[1], line_no));
    } else if (key == "agent") {
      parse_agent_line(t, line_no, &config);
    } else if (key == "schema_version") {
      need(1);
      if (parse_int(t[1], line_no) != kSchemaVersion) {
        fail(line_no, "unsupported schema_version");
      }
    } else {
      fail(line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_vertices && !config.agents.empty()) {
    config.graph.vertex_count = static_cast<int>(config.agents.size());
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) {
    throw ValidationError("cannot open config file '" + file_path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "schema_version " << kSchemaVersion << "\n";
  out << "path.kind "
      << (c.path.kind == PathKind::kCircle ? "circle" : "ellipse") << "\n";
  out << "path.center " << fmt(c.path.center.x()) << " "
      << fmt(c.path.center.y()) << "\n";
  if (c.path.kind == PathKind::kCircle) {
    out << "path.radius " << fmt(c.path.radius) << "\n";
  } else {
    out << "path.semi_a " << fmt(c.path.semi_a) << "\n";
    out << "path.semi_b " << fmt(c.path.semi_b) << "\n";
  }
  out << "graph.vertices " << c.graph.vertex_count << "\n";
  for (const auto& [tail, head] : c.graph.edges) {
    out << "graph.edge " << tail << " " << head << "\n";
  }
  if (!c.z_star_deg.empty()) {
    out << "formation.z_star_deg";
    for (double z : c.z_star_deg) out << " " << fmt(z);
    out << "\n";
  }
  out << "formation.k_r " << fmt(c.k_r) << "\n";
  out << "gains.k_e " << fmt(c.k_e) << "\n";
  out << "gains.k_d " << fmt(c.k_d) << "\n";
  out << "limits.bank_deg " << fmt(c.bank_limit_deg) << "\n";
  out << "physics.gravity " << fmt(c.gravity) << "\n";
  out << "wind " << fmt(c.wind.x()) << " " << fmt(c.wind.y()) << "\n";
  out << "network.period " << fmt(c.network.period) << "\n";
  out << "network.loss " << fmt(c.network.loss) << "\n";
  out << "network.delay " << fmt(c.network.delay) << "\n";
  for (const auto& [a, b] : c.network.blackouts) {
    out << "network.blackout " << fmt(a) << " " << fmt(b) << "\n";
  }
  out << "network.position_noise " << fmt(c.network.position_noise) << "\n";
  out << "run.duration " << fmt(c.duration) << "\n";
  out << "run.dt " << fmt(c.dt) << "\n";
  out << "run.trace_every " << c.trace_every << "\n";
  out << "seed " << c.seed << "\n";
  for (const auto& a : c.agents) {
    out << "agent " << a.id << " speed " << fmt(a.speed);
    if (a.use_phase) {
      out << " phase_deg " << fmt(a.phase_deg);
    } else {
      out << " x " << fmt(a.position.x()) << " y " << fmt(a.position.y())
          << " yaw_deg " << fmt(a.yaw_deg);
    }
    if (a.initial_u_r != 0.0) out << " initial_u_r " << fmt(a.initial_u_r);
    if (a.has_initial_level) out << " level " << fmt(a.initial_level);
    out << "\n";
  }
  return out.str();
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string text = serialize_scenario(config);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> warnings;
  // Geometry.
  if (c.path.kind == PathKind::kCircle) {
    if (!(c.path.radius > 0.0)) {
      throw ValidationError("path.radius must be positive for circles");
    }
  } else {
    if (!(c.path.semi_a > 0.0) || !(c.path.semi_b > 0.0)) {
      throw ValidationError("path.semi_a/semi_b must be positive");
    }
    if (c.graph.edge_count() > 0) {
      throw ValidationError(
          "formation edges require a circle path; ellipse scenarios are "
          "tracking-only");
    }
  }
  validate(c.graph);
  if (c.path.kind == PathKind::kCircle) {
    validate_gains(make_formation_spec(c), &warnings);
  }
  // Guidance gains.
  GuidanceGainsd gains{c.k_e, c.k_d};
  gains.validate();
  if (!(c.bank_limit_deg > 0.0)) {
    throw ValidationError("limits.bank_deg must be positive");
  }
  if (!(c.gravity > 0.0)) {
    throw ValidationError("physics.gravity must be positive");
  }
  // Network.
  if (!(c.network.period > 0.0)) {
    throw ValidationError("network.period must be positive");
  }
  if (c.network.loss < 0.0 || c.network.loss > 1.0) {
    throw ValidationError("network.loss must lie in [0, 1]");
  }
  if (c.network.delay < 0.0) {
    throw ValidationError("network.delay must be non-negative");
  }
  for (const auto& [a, b] : c.network.blackouts) {
    if (b < a) {
      throw ValidationError("network.blackout window ends before it starts");
    }
  }
  if (c.network.position_noise < 0.0) {
    throw ValidationError("network.position_noise must be non-negative");
  }
  // Run parameters.
  if (!(c.duration > 0.0)) {
    throw ValidationError("run.duration must be positive");
  }
  if (!(c.dt > 0.0)) {
    throw ValidationError("run.dt must be positive");
  }
  if (c.trace_every < 1) {
    throw ValidationError("run.trace_every must be >= 1");
  }
  // Agents: one per graph vertex, ids 1..n.
  if (c.agents.empty()) {
    throw ValidationError("scenario needs at least one agent");
  }
  std::set<int> ids;
  double max_speed = 0.0;
  for (const auto& a : c.agents) {
    if (!ids.insert(a.id).second) {
      throw ValidationError("duplicate agent id " + std::to_string(a.id));
    }
    if (a.id < 1 || a.id > c.graph.vertex_count) {
      throw ValidationError("agent id " + std::to_string(a.id) +
                            " outside graph vertices [1," +
                            std::to_string(c.graph.vertex_count) + "]");
    }
    if (!(a.speed > 0.0)) {
      throw ValidationError("agent " + std::to_string(a.id) +
                            ": speed must be positive");
    }
    max_speed = std::max(max_speed, a.speed);
    if (a.use_phase && c.path.kind != PathKind::kCircle) {
      throw ValidationError("agent " + std::to_string(a.id) +
                            ": phase placement needs a circle path");
    }
    if (!a.use_phase &&
        (a.position - c.path.center).norm() < kDegenerateRadius) {
      throw ValidationError("agent " + std::to_string(a.id) +
                            ": initial position sits at the path center");
    }
    if (c.path.kind == PathKind::kCircle &&
        !(c.path.radius + a.initial_u_r > 0.0)) {
      throw ValidationError("agent " + std::to_string(a.id) +
                            ": initial_u_r yields non-positive radius");
    }
    if (a.has_initial_level && a.initial_u_r != 0.0) {
      throw ValidationError("agent " + std::to_string(a.id) +
                            ": give either initial_u_r or level, not both");
    }
    if (a.has_initial_level && c.path.kind == PathKind::kCircle &&
        !(c.path.radius * c.path.radius + a.initial_level > 0.0)) {
      throw ValidationError("agent " + std::to_string(a.id) +
                            ": level below the degenerate level -r^2");
    }
  }
  if (static_cast<int>(c.agents.size()) != c.graph.vertex_count) {
    throw ValidationError("need exactly one agent per graph vertex (" +
                          std::to_string(c.graph.vertex_count) + "), got " +
                          std::to_string(c.agents.size()));
  }
  // Timestep hint: the tracking mode has rate ~ 2 * speed * k_e * |p| near
  // the commanded circles; explicit integration wants rate * dt well below 1.
  if (c.path.kind == PathKind::kCircle) {
    const double reach =
        c.path.radius + kPi * c.k_r * max_degree(c.graph);
    const double rate = 2.0 * max_speed * c.k_e * reach;
    if (rate * c.dt > 1.0) {
      warnings.push_back(
          "run.dt is large for the tracking dynamics (rate*dt = " +
          std::to_string(rate * c.dt) +
          "); consider dt <= " + std::to_string(0.5 / rate));
    }
  }
  return warnings;
}

std::string apply_overrides(
    std::string text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key == "graph.edge" || key == "agent" || key == "network.blackout") {
      throw ValidationError("key '" + key +
                            "' is repeatable and cannot be overridden");
    }
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    bool replaced = false;
    while (std::getline(in, line)) {
      const auto t = tokenize(line);
      if (!replaced && !t.empty() && t[0] == key) {
        out << key << " " << value << "\n";
        replaced = true;
      } else {
        out << line << "\n";
      }
    }
    if (!replaced) {
      out << key << " " << value << "\n";
    }
    text = out.str();
  }
  return text;
}

ImplicitPathd make_path(const PathConfig& path) {
  if (path.kind == PathKind::kCircle) {
    return ImplicitPathd::circle(path.radius, path.center);
  }
  return ImplicitPathd::ellipse(path.semi_a, path.semi_b, path.center);
}

FormationSpec make_formation_spec(const ScenarioConfig& config) {
  FormationSpec spec;
  spec.graph = config.graph;
  spec.desired_angles.reserve(config.z_star_deg.size());
  for (double z : config.z_star_deg) {
    spec.desired_angles.push_back(wrap_pi(deg_to_rad(z)));
  }
  if (spec.desired_angles.empty() && config.graph.edge_count() > 0) {
    spec.desired_angles.assign(config.graph.edge_count(), 0.0);
  }
  spec.gain = config.k_r;
  spec.target_radius =
      config.path.kind == PathKind::kCircle ? config.path.radius : 1.0;
  return spec;
}

}  // namespace circform
