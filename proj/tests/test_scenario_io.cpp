// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "circform/analysis.hpp"
#include "circform/scenario.hpp"
#include "circform/sim.hpp"
#include "circform/trace_io.hpp"

using namespace circform;

namespace {

const char* kExampleConfig = R"(# three vehicles on a shared circle
path.kind circle
path.center 0 0
path.radius 80

graph.vertices 3
graph.edge 1 2
graph.edge 2 3

formation.z_star_deg 0 0
formation.k_r 8

gains.k_e 1
gains.k_d 1

network.period 0.5
network.loss 0.25
network.blackout 150 170

run.duration 12
run.dt 0.01
run.trace_every 5
seed 42

agent 1 speed 13 phase_deg 130
agent 2 speed 13 phase_deg 0
agent 3 speed 13 phase_deg 110
)";

}  // namespace

TEST_CASE("scenario parsing and canonical round trip") {
  const auto config = parse_scenario(kExampleConfig);
  CHECK(config.path.radius == 80.0);
  CHECK(config.graph.vertex_count == 3);
  REQUIRE(config.graph.edges.size() == 2);
  CHECK(config.graph.edges[1] == std::pair{2, 3});
  CHECK(config.k_r == 8.0);
  CHECK(config.network.loss == 0.25);
  REQUIRE(config.network.blackouts.size() == 1);
  CHECK(config.network.blackouts[0].second == 170.0);
  CHECK(config.seed == 42);
  REQUIRE(config.agents.size() == 3);
  CHECK(config.agents[0].phase_deg == 130.0);

  const auto warnings = validate_scenario(config);
  REQUIRE(warnings.size() == 1);  // coarse dt for these gains
  CHECK(warnings[0].find("run.dt") != std::string::npos);

  // serialize -> parse -> serialize is a fixed point.
  const std::string canon = serialize_scenario(config);
  const auto reparsed = parse_scenario(canon);
  CHECK(serialize_scenario(reparsed) == canon);
  CHECK(config_hash(reparsed) == config_hash(config));
}

TEST_CASE("scenario parser reports offending lines") {
  CHECK_THROWS_WITH_AS(parse_scenario("path.kind square\n"),
                       doctest::Contains("line 1"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario("\nbogus.key 1\n"),
                       doctest::Contains("line 2"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("path.radius eighty\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("agent 1 speed\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("agent 1 speed 13\n"), ValidationError);
}

TEST_CASE("scenario validation failures") {
  auto base = parse_scenario(kExampleConfig);

  SUBCASE("gain condition") {
    auto c = base;
    c.k_r = 13.0;
    CHECK_THROWS_WITH_AS(validate_scenario(c), doctest::Contains("gain"),
                         ValidationError);
  }
  SUBCASE("cyclic graph") {
    auto c = base;
    c.graph.edges.push_back({3, 1});
    c.z_star_deg.push_back(0.0);
    CHECK_THROWS_AS(validate_scenario(c), ValidationError);
  }
  SUBCASE("missing agents") {
    auto c = base;
    c.agents.pop_back();
    CHECK_THROWS_AS(validate_scenario(c), ValidationError);
  }
  SUBCASE("bad loss") {
    auto c = base;
    c.network.loss = 1.5;
    CHECK_THROWS_AS(validate_scenario(c), ValidationError);
  }
  SUBCASE("ellipse with edges") {
    auto c = base;
    c.path.kind = PathKind::kEllipse;
    c.path.semi_a = 100.0;
    c.path.semi_b = 60.0;
    CHECK_THROWS_AS(validate_scenario(c), ValidationError);
  }
  SUBCASE("disconnected graph warns") {
    auto c = base;
    c.graph = {4, {{1, 2}, {3, 4}}};
    c.agents.push_back(c.agents.back());
    c.agents.back().id = 4;
    const auto warnings = validate_scenario(c);
    REQUIRE(warnings.size() >= 1);
    CHECK(warnings[0].find("disconnected") != std::string::npos);
  }
}

TEST_CASE("overrides replace scalar keys only") {
  const std::string text = "seed 1\nrun.dt 0.02\n";
  const std::string out =
      apply_overrides(text, {{"seed", "9"}, {"network.loss", "0.5"}});
  const auto config = parse_scenario(out + "\n");
  CHECK(config.seed == 9);
  CHECK(config.network.loss == 0.5);
  CHECK(config.dt == 0.02);
  CHECK_THROWS_AS(apply_overrides(text, {{"graph.edge", "1 2"}}),
                  ValidationError);
}

TEST_CASE("trace files round trip through the csv layer") {
  auto config = parse_scenario(kExampleConfig);
  config.duration = 3.0;
  const auto trace = run_scenario(config);
  const auto report = analyze_trace(trace, config);

  const auto dir = std::filesystem::temp_directory_path() / "circform_io_test";
  std::filesystem::remove_all(dir);
  write_run_outputs(dir.string(), config, trace, report);

  for (const char* name : {"trace.csv", "local_errors.csv", "messages.csv",
                           "summary.json", "resolved_config.cfg"}) {
    CHECK(std::filesystem::exists(dir / name));
  }

  const auto loaded = read_trace_dir(dir.string());
  REQUIRE(loaded.agents.size() == trace.agents.size());
  REQUIRE(loaded.edge_errors.size() == trace.edge_errors.size());
  CHECK(loaded.agent_count == 3);
  CHECK(loaded.edge_count == 2);
  for (size_t i = 0; i < trace.agents.size(); i += 97) {
    CHECK(loaded.agents[i].t == trace.agents[i].t);
    CHECK(loaded.agents[i].x == trace.agents[i].x);
    CHECK(loaded.agents[i].theta == trace.agents[i].theta);
    CHECK(loaded.agents[i].bank == trace.agents[i].bank);
  }

  // The resolved snapshot reproduces the run bit for bit.
  const auto resolved =
      load_scenario((dir / "resolved_config.cfg").string());
  const auto again = run_scenario(resolved);
  REQUIRE(again.agents.size() == trace.agents.size());
  std::ostringstream first_csv, second_csv;
  write_trace_csv(first_csv, trace, config_hash(config));
  write_trace_csv(second_csv, again, config_hash(resolved));
  CHECK(first_csv.str() == second_csv.str());

  // Truncated rows are reported.
  {
    std::ofstream out(dir / "trace.csv", std::ios::app);
    out << "1.0,2,3\n";
  }
  CHECK_THROWS_WITH_AS(read_trace_dir(dir.string()),
                       doctest::Contains("truncated"), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary json carries schema version and config hash") {
  auto config = parse_scenario(kExampleConfig);
  config.duration = 1.0;
  const auto trace = run_scenario(config);
  const auto report = analyze_trace(trace, config);
  const std::string json = summary_json(config, trace, report);
  CHECK(json.find("\"schema_version\": 1") != std::string::npos);
  CHECK(json.find("config_hash") != std::string::npos);
}
