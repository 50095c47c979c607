// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include "circform/analysis.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace circform;

namespace {

FormationSpec chain_spec() {
  FormationSpec spec;
  spec.graph = {3, {{1, 2}, {2, 3}}};
  spec.desired_angles = {0.0, 0.0};
  spec.gain = 8.0;
  spec.target_radius = 80.0;
  return spec;
}

}  // namespace

TEST_CASE("linearization eigenvalues for the reference formation") {
  const auto unit = linearize(chain_spec(), 1.0);
  REQUIRE(unit.eigenvalues.size() == 2);
  CHECK(unit.eigenvalues(0) == doctest::Approx(-0.00375).epsilon(1e-9));
  CHECK(unit.eigenvalues(1) == doctest::Approx(-0.00125).epsilon(1e-9));

  const auto fast = linearize(chain_spec(), 13.0);
  CHECK(fast.eigenvalues(0) == doctest::Approx(-0.04875).epsilon(1e-9));
  CHECK(fast.eigenvalues(1) == doctest::Approx(-0.01625).epsilon(1e-9));

  auto open_loop = chain_spec();
  open_loop.gain = 0.0;
  const auto zero = linearize(open_loop, 13.0);
  CHECK(zero.system_matrix.isZero(0.0));
  CHECK(zero.eigenvalues.cwiseAbs().maxCoeff() == 0.0);

  FormationSpec cyclic = chain_spec();
  cyclic.graph = {3, {{1, 2}, {2, 3}, {3, 1}}};
  CHECK_THROWS_AS(linearize(cyclic, 1.0), ValidationError);
}

TEST_CASE("linearization scales the consensus spectrum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> gain(0.1, 3.0);
  std::uniform_real_distribution<double> speed(0.5, 20.0);
  FormationSpec spec = chain_spec();
  for (int trial = 0; trial < 50; ++trial) {
    spec.gain = gain(rng);
    const double s = speed(rng);
    const auto lin = linearize(spec, s);
    const double scale = s * spec.gain / (80.0 * 80.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> base(
        consensus_matrix(spec.graph).cast<double>());
    for (int i = 0; i < lin.eigenvalues.size(); ++i) {
      CHECK(lin.eigenvalues(i) ==
            doctest::Approx(scale * base.eigenvalues()(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("predicted confinement radius") {
  CHECK(predicted_confinement(chain_spec()) ==
        doctest::Approx(80.0 + 16.0 * kPi));
  CHECK(predicted_confinement(chain_spec()) ==
        doctest::Approx(130.27).epsilon(1e-4));

  auto zero_gain = chain_spec();
  zero_gain.gain = 0.0;
  CHECK(predicted_confinement(zero_gain) == 80.0);

  FormationSpec star;
  star.graph = {4, {{2, 1}, {2, 3}, {2, 4}}};
  star.desired_angles = {0, 0, 0};
  star.gain = 8.0;
  star.target_radius = 80.0;
  CHECK(predicted_confinement(star) == doctest::Approx(80.0 + 24.0 * kPi));
  CHECK(predicted_confinement(star) == doctest::Approx(155.40).epsilon(1e-4));
}

TEST_CASE("confinement exceeds r for every valid spec with edges") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> gain(1e-3, 12.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto spec = chain_spec();
    spec.gain = gain(rng);
    try {
      validate_gains(spec);
    } catch (const ValidationError&) {
      continue;
    }
    CHECK(predicted_confinement(spec) > spec.target_radius);
  }
}

TEST_CASE("exponential fit recovers a synthetic decay exactly") {
  std::vector<double> t, v;
  for (int i = 0; i <= 4000; ++i) {
    t.push_back(0.1 * i);
    v.push_back(0.2 * std::exp(-0.01625 * 0.1 * i));
  }
  const auto fit = fit_exponential(t, v);
  REQUIRE(fit.accepted);
  CHECK(fit.rate == doctest::Approx(0.01625).epsilon(1e-6));
  CHECK(fit.amplitude == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exponential fit rejects non-decaying data") {
  std::vector<double> t, v;
  for (int i = 0; i < 100; ++i) {
    t.push_back(i);
    v.push_back(0.1 * std::exp(0.02 * i));  // growing
  }
  const auto fit = fit_exponential(t, v);
  CHECK_FALSE(fit.accepted);
  CHECK(fit.diagnostic.find("non-decaying") != std::string::npos);

  const auto tiny = fit_exponential(std::vector<double>{0, 1},
                                    std::vector<double>{1, 1});
  CHECK_FALSE(tiny.accepted);
  CHECK_FALSE(tiny.diagnostic.empty());
}

TEST_CASE("fit recovers the rates of the linear consensus model") {
  // Trace generated by the closed-form solution of eps' = M eps along the
  // slow eigenvector: both components decay at the slow rate.
  const auto lin = linearize(chain_spec(), 13.0);
  const double slow = -lin.eigenvalues(1);
  std::vector<double> t, e1, e2;
  for (int i = 0; i <= 3000; ++i) {
    const double time = 0.1 * i;
    t.push_back(time);
    const double v = 0.2 * std::exp(-slow * time);
    e1.push_back(v);
    e2.push_back(v);
  }
  const auto f1 = fit_exponential(t, e1);
  const auto f2 = fit_exponential(t, e2);
  REQUIRE(f1.accepted);
  REQUIRE(f2.accepted);
  CHECK(f1.rate == doctest::Approx(slow).epsilon(1e-6));
  CHECK(f2.rate == doctest::Approx(slow).epsilon(1e-6));
}

TEST_CASE("settling contract: silent runs report not settled") {
  ScenarioConfig config;
  config.path.kind = PathKind::kCircle;
  config.path.radius = 80.0;
  config.graph = {3, {{1, 2}, {2, 3}}};
  config.z_star_deg = {0.0, 0.0};
  config.k_r = 8.0;
  config.k_e = 1.0;
  config.k_d = 1.0;
  config.duration = 90.0;
  config.dt = 5e-4;
  config.trace_every = 40;
  config.network.loss = 1.0;
  for (int i = 0; i < 3; ++i) {
    AgentInit a;
    a.id = i + 1;
    a.speed = 13.0;
    a.use_phase = true;
    a.phase_deg = 10.0 * i;
    config.agents.push_back(a);
  }
  const auto trace = run_scenario(config);
  const auto report = analyze_trace(trace, config);
  for (const auto& e : report.edges) {
    CHECK_FALSE(e.settled);
    CHECK(e.settle_time == -1.0);
  }
}

TEST_CASE("runs with lazy tracking are flagged outside the fast-slow regime") {
  ScenarioConfig config;
  config.path.kind = PathKind::kCircle;
  config.path.radius = 80.0;
  config.graph = {2, {{1, 2}}};
  config.z_star_deg = {0.0};
  config.k_r = 8.0;
  config.k_d = 1.0;
  config.duration = 60.0;
  config.dt = 0.002;
  config.trace_every = 10;
  for (int i = 0; i < 2; ++i) {
    AgentInit a;
    a.id = i + 1;
    a.speed = 13.0;
    a.use_phase = true;
    a.phase_deg = 40.0 * i;
    config.agents.push_back(a);
  }

  auto brisk = config;
  brisk.k_e = 1.0;
  brisk.dt = 2e-4;  // resolve the fast tracking mode at this field gain
  brisk.trace_every = 100;
  const auto fast = analyze_trace(run_scenario(brisk), brisk);
  CHECK(fast.slow_fast_ok);

  // A vanishing field gain leaves the vehicles far off their commanded
  // level sets relative to the commanded jumps.
  auto lazy = config;
  lazy.k_e = 1e-7;
  const auto slow = analyze_trace(run_scenario(lazy), lazy);
  CHECK_FALSE(slow.slow_fast_ok);
  REQUIRE(slow.notes.size() >= 1);
}
