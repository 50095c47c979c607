// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "circform/gvf.hpp"

namespace circform {

namespace {

Eigen::Vector3d dynamics(const Eigen::Vector3d& s, double speed, double u_psi,
                         const Eigen::Vector2d& wind) {
  return {speed * std::cos(s.z()) + wind.x(),
          speed * std::sin(s.z()) + wind.y(), u_psi};
}

}  // namespace

AgentState step_unicycle(const AgentState& state, double u_psi, double dt,
                         const Eigen::Vector2d& wind) {
  if (!(dt > 0.0)) {
    throw ValidationError("step_unicycle: dt must be positive");
  }
  const Eigen::Vector3d s0{state.position.x(), state.position.y(), state.yaw};
  const Eigen::Vector3d k1 = dynamics(s0, state.speed, u_psi, wind);
  const Eigen::Vector3d k2 =
      dynamics(s0 + 0.5 * dt * k1, state.speed, u_psi, wind);
  const Eigen::Vector3d k3 =
      dynamics(s0 + 0.5 * dt * k2, state.speed, u_psi, wind);
  const Eigen::Vector3d k4 = dynamics(s0 + dt * k3, state.speed, u_psi, wind);
  const Eigen::Vector3d s1 = s0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  AgentState out = state;
  out.position = {s1.x(), s1.y()};
  out.yaw = wrap_pi(s1.z());
  return out;
}

// xoshiro256** seeded through splitmix64.
DeterministicRng::DeterministicRng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : state_) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    s = z ^ (z >> 31);
  }
}

std::uint64_t DeterministicRng::next_u64() {
  const auto rotl = [](std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  };
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double DeterministicRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double DeterministicRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  spare_ = mag * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return mag * std::cos(kTwoPi * u2);
}

NetworkSim::NetworkSim(const NetworkModel& model, const FormationGraph& graph,
                       std::uint64_t seed)
    : model_(model), graph_(graph), rng_(seed) {}

void NetworkSim::tick(double now, std::span<const Eigen::Vector2d> positions) {
  const bool blackout = model_.in_blackout(now);
  for (int k = 0; k < graph_.edge_count(); ++k) {
    const auto [tail, head] = graph_.edges[k];
    for (const auto& [from, to] :
         {std::pair{tail, head}, std::pair{head, tail}}) {
      const double draw = rng_.uniform();
      MessageRecord rec;
      rec.send_time = now;
      rec.edge = k;
      rec.from = from;
      rec.to = to;
      if (blackout) {
        rec.outcome = MessageOutcome::kBlackout;
      } else if (draw < model_.loss) {
        rec.outcome = MessageOutcome::kLost;
      } else {
        rec.outcome = MessageOutcome::kDelivered;
        rec.deliver_time = now + model_.delay;
        Eigen::Vector2d payload = positions[from - 1];
        if (model_.position_noise > 0.0) {
          payload.x() += model_.position_noise * rng_.normal();
          payload.y() += model_.position_noise * rng_.normal();
        }
        pending_.push_back(
            {k, from, to, NeighborSnapshot{from, payload, rec.deliver_time}});
      }
      log_.push_back(rec);
    }
  }
}

std::vector<NetworkSim::Delivery> NetworkSim::collect_due(double now) {
  std::vector<Delivery> due;
  while (!pending_.empty() &&
         pending_.front().snapshot.receive_time <= now + 1e-12) {
    due.push_back(pending_.front());
    pending_.pop_front();
  }
  return due;
}

AgentState initial_state(const ScenarioConfig& config, const AgentInit& agent) {
  AgentState state;
  state.speed = agent.speed;
  if (agent.use_phase) {
    const double theta = deg_to_rad(agent.phase_deg);
    const double r = config.path.radius;
    const Eigen::Vector2d q{r * std::cos(theta), -r * std::sin(theta)};
    state.position = config.path.center + q;
    const Eigen::Vector2d tangent = rot90_cw<double>(q).normalized();
    state.yaw = std::atan2(tangent.y(), tangent.x());
  } else {
    state.position = agent.position;
    state.yaw = wrap_pi(deg_to_rad(agent.yaw_deg));
  }
  if (agent.has_initial_level) {
    state.level = agent.initial_level;
  } else if (config.path.kind == PathKind::kCircle) {
    state.level = level_for_radius_offset(config.path.radius, agent.initial_u_r);
  } else {
    state.level = 0.0;
  }
  return state;
}

SimTrace run_scenario(const ScenarioConfig& config) {
  SimTrace trace;
  trace.notes = validate_scenario(config);
  trace.dt = config.dt;
  trace.trace_every = config.trace_every;
  trace.agent_count = config.graph.vertex_count;
  trace.edge_count = config.graph.edge_count();

  const ImplicitPathd base_path = make_path(config.path);
  const bool formation_active = config.path.kind == PathKind::kCircle;
  const FormationSpec spec = make_formation_spec(config);
  const GuidanceGainsd gains{config.k_e, config.k_d};
  const double bank_limit = deg_to_rad(config.bank_limit_deg);

  const int n = config.graph.vertex_count;
  std::map<int, const AgentInit*> by_id;
  for (const auto& a : config.agents) by_id[a.id] = &a;

  std::vector<AgentState> states(n);
  std::vector<AgentController> controllers;
  controllers.reserve(n);
  for (int id = 1; id <= n; ++id) {
    const AgentInit& init = *by_id.at(id);
    states[id - 1] = initial_state(config, init);
    if (formation_active) {
      controllers.emplace_back(spec, id, init.initial_u_r);
    }
  }

  NetworkSim network(config.network, config.graph, config.seed);
  const long long steps =
      std::max<long long>(1, std::llround(config.duration / config.dt));
  long long tick_count = 0;
  std::vector<double> held_u_psi(n, 0.0);
  std::vector<Eigen::Vector2d> positions(n);

  const size_t sampled_steps = static_cast<size_t>(
      (steps + config.trace_every - 1) / config.trace_every);
  trace.agents.reserve(sampled_steps * n);
  trace.edge_errors.reserve(sampled_steps * 2 * config.graph.edge_count());

  for (long long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * config.dt;

    bool tick_now = false;
    while (static_cast<double>(tick_count) * config.network.period <=
           t + 1e-9) {
      tick_now = true;
      for (int i = 0; i < n; ++i) positions[i] = states[i].position;
      network.tick(t, positions);
      ++tick_count;
    }
    for (const auto& d : network.collect_due(t)) {
      if (formation_active) controllers[d.to - 1].receive(d.edge, d.snapshot);
    }
    if (tick_now && formation_active) {
      for (int i = 0; i < n; ++i) {
        try {
          controllers[i].update(states[i].position, config.path.center, t);
        } catch (const DegeneracyError& err) {
          throw DegeneracyError("t=" + std::to_string(t) + " agent=" +
                                std::to_string(i + 1) + ": " + err.what());
        }
        states[i].level = controllers[i].level();
      }
    }

    const bool record = step % config.trace_every == 0;
    for (int i = 0; i < n; ++i) {
      AgentState& s = states[i];
      const ImplicitPathd path = base_path.with_level(s.level);
      double u_psi = held_u_psi[i];
      double bank = 0.0;
      double path_error = 0.0;
      double theta = 0.0;
      try {
        path_error = level(path, s.position);
        theta = travel_angle(path, s.position);
        u_psi = steering(path, s.position, s.yaw, s.speed, gains);
      } catch (const ZeroFieldError&) {
        // Measure-zero event: hold the previous turn rate for one step.
        trace.notes.push_back("t=" + std::to_string(t) + " agent=" +
                              std::to_string(i + 1) +
                              ": guidance field vanished, holding turn rate");
      } catch (const DegeneracyError& err) {
        throw DegeneracyError("t=" + std::to_string(t) + " agent=" +
                              std::to_string(i + 1) + ": " + err.what());
      }
      bank = bank_angle(u_psi, s.speed, config.gravity, bank_limit);
      held_u_psi[i] = u_psi;

      if (record) {
        AgentSample sample;
        sample.t = t;
        sample.agent = i + 1;
        sample.x = s.position.x();
        sample.y = s.position.y();
        sample.psi = s.yaw;
        sample.e = path_error;
        sample.theta = theta;
        sample.u_r = formation_active ? controllers[i].radius_offset() : 0.0;
        sample.c = s.level;
        sample.u_psi = u_psi;
        sample.bank = bank;
        trace.agents.push_back(sample);
      }
      s = step_unicycle(s, u_psi, config.dt, config.wind);
    }
    if (record && formation_active) {
      for (int i = 0; i < n; ++i) {
        for (const auto& comp : controllers[i].current_error(t).components) {
          EdgeSample es;
          es.t = t;
          es.agent = i + 1;
          es.edge = comp.edge;
          es.e_theta = comp.missing ? 0.0 : comp.e_theta;
          es.staleness = comp.staleness;
          trace.edge_errors.push_back(es);
        }
      }
    }
  }
  trace.messages = network.log();
  return trace;
}

}  // namespace circform
