// Copyright 2026 The Fabrica Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fabrica/config.hpp"
#include "fabrica/errors.hpp"
#include "fabrica/output.hpp"
#include "fabrica/particles.hpp"
#include "oracles.hpp"

using namespace fabrica;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fabrica_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult cli(const std::string& args) {
  const fs::path dir = scratch("cli_io");
  const std::string cmd = std::string(FABRICA_CLI) + " " + args + " > " + (dir / "out").string() +
                          " 2> " + (dir / "err").string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "out"), slurp(dir / "err")};
}

ParticleParams short_params() {
  ParticleParams p;
  p.rollout.t_max = 3.0;
  return p;
}

const char* kSmallInvariants =
    R"({"kind": "invariants", "invariants": {"conservation_starts": 1, "conservation_steps": 200,
        "derivative_states": 2, "gate_points": 100, "homogeneity_states": 2, "states": 5,
        "tuples": 2}})";

}  // namespace

TEST_CASE("particle rollouts are deterministic") {
  const ParticleWorld world = ParticleWorld::standard(3);
  const ParticleRun a = run_particle(world, short_params(), ParticleVariant::kBentFinsler, 2.0, 0);
  const ParticleRun b = run_particle(world, short_params(), ParticleVariant::kBentFinsler, 2.0, 0);
  CHECK(rollout_csv(a.rollout) == rollout_csv(b.rollout));
}

TEST_CASE("worker count does not change results") {
  const ParticleWorld world = ParticleWorld::standard(2);
  const std::vector<ParticleVariant> variants = {ParticleVariant::kUnbentFinsler,
                                                 ParticleVariant::kBentFinsler};
  const auto one = run_particles(world, short_params(), variants, {2.0}, 1);
  const auto two = run_particles(world, short_params(), variants, {2.0}, 2);
  REQUIRE(one.size() == two.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].variant == two[i].variant);
    CHECK(one[i].index == two[i].index);
    CHECK(rollout_csv(one[i].rollout) == rollout_csv(two[i].rollout));
  }
}

TEST_CASE("csv layout") {
  CHECK(csv_header(2) == "t,q0,q1,qd0,qd1,H,Le,Lex,min_dist");
  const ParticleRun r =
      run_particle(ParticleWorld::standard(1), short_params(), ParticleVariant::kBentFinsler, 2.0, 0);
  const std::string csv = rollout_csv(r.rollout);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == csv_header(2));
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
    ++rows;
  }
  CHECK(rows == static_cast<int>(r.rollout.t.size()));
}

TEST_CASE("shipped configs are canonical") {
  const fs::path dir = fs::path(FABRICA_SOURCE_DIR) / "configs";
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    CAPTURE(e.path().string());
    const std::string text = slurp(e.path());
    CHECK(serialize_config(parse_config(text)) == text);
    ++n;
  }
  CHECK(n == 5);
}

TEST_CASE("committed schemas match the generators") {
  const fs::path dir = fs::path(FABRICA_SOURCE_DIR) / "schemas";
  CHECK(slurp(dir / "config.schema.json") == config_schema());
  CHECK(slurp(dir / "metrics.schema.json") == metrics_schema());
}

TEST_CASE("defaults round-trip") {
  for (ExperimentKind k : {ExperimentKind::kParticles, ExperimentKind::kArmWall,
                           ExperimentKind::kArmConstraint, ExperimentKind::kInvariants,
                           ExperimentKind::kEnergizeDemo}) {
    const std::string a = serialize_config(default_config(k));
    CHECK(serialize_config(parse_config(a)) == a);
    CHECK(nlohmann::json::parse(a).at("kind") == kind_name(k));
  }
}

TEST_CASE("config errors name the offending field") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"kind": "particles", "bogus": 1})").find("bogus") != std::string::npos);
  CHECK(message(R"({"kind": "nope"})").find("kind") != std::string::npos);
  CHECK(message(R"({"kind": "invariants", "integrator": {"dt": -1}})").find("integrator.dt") !=
        std::string::npos);
  CHECK(message(R"({"kind": "particles", "arm_wall": {}})").find("arm_wall") != std::string::npos);
  CHECK(message("{\"kind\": ").find("syntax error") != std::string::npos);
  CHECK(message(R"({"kind": "energize_demo", "energize_demo": {"qd": [1], "pi": [1, 2]}})")
            .find("same length") != std::string::npos);
}

TEST_CASE("integrator settings propagate into every section") {
  ExperimentConfig c = parse_config(
      R"({"kind": "particles", "seed": 7, "jobs": 3, "integrator": {"dt": 0.002, "scheme": "euler"}})");
  CHECK(c.particles.params.rollout.integrator.dt == 0.002);
  CHECK(c.particles.params.rollout.integrator.scheme == Scheme::kEuler);
  CHECK(c.arm_constraint.compare_dt == 0.002);
  CHECK(c.invariants.seed == 7);
  CHECK(c.invariants.jobs == 3);
}

TEST_CASE("cli energization demo") {
  const CliResult r = cli("demo-energize");
  CHECK(r.code == 0);
  CHECK(r.out.find("alpha = -2\n") != std::string::npos);
  CHECK(r.out.find("accel = (0, 3)") != std::string::npos);
  CHECK(cli("demo-energize --qd 1,x").code == 2);
  CHECK(cli("demo-energize --qd 1,0,0 --pi 1,2").code == 2);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "small.json") << kSmallInvariants;
  std::ofstream(dir / "bad.json") << R"({"kind": "invariants", "extra": true})";
  const std::string small = (dir / "small.json").string();

  const CliResult ok = cli("check --config " + small + " --out " + (dir / "ok").string());
  CHECK(ok.code == 0);
  CHECK(fs::exists(dir / "ok" / "properties.json"));
  CHECK(fs::exists(dir / "ok" / "config.json"));

  // A step far too coarse for the conservation tolerance.
  const CliResult coarse =
      cli("check --config " + small + " --dt 0.2 --out " + (dir / "coarse").string());
  CHECK(coarse.code == 1);
  CHECK(coarse.err.find("energy_conservation") != std::string::npos);

  CHECK(cli("run " + (dir / "bad.json").string()).code == 2);
  CHECK(cli("run").code == 2);
  CHECK(cli("frobnicate").code == 2);

  std::ofstream(dir / "file") << "x";
  CHECK(cli("check --config " + small + " --out " + (dir / "file" / "sub").string()).code == 3);
}

TEST_CASE("cli run writes metrics") {
  const fs::path dir = scratch("run");
  std::ofstream(dir / "p.json")
      << R"({"kind": "particles", "particles": {"world": {"starts": [[3.0, 0.5]]},
             "variants": ["bent_finsler"], "speeds": [2.0]}})";
  const CliResult r = cli("run " + (dir / "p.json").string() + " --out " + (dir / "out").string());
  REQUIRE(r.code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
  CHECK(m.at("kind") == "particles");
  REQUIRE(m.at("runs").size() == 1);
  const auto& run = m.at("runs")[0];
  CHECK(fs::exists(dir / "out" / run.at("csv").get<std::string>()));
  CHECK(run.at("hausdorff_to_ref").is_null());
}
