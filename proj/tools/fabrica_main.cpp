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

// Command-line entry point: run experiments, check invariants, print the
// energization demo and build info.
//
// Exit codes: 0 success, 1 invariant violation, 2 bad config or usage,
// 3 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fabrica/config.hpp"
#include "fabrica/errors.hpp"
#include "fabrica/runner.hpp"

namespace {

enum class Level { kError = 0, kInfo = 1, kDebug = 2 };

Level log_level() {
  const char* env = std::getenv("FABRICA_LOG");
  if (!env) return Level::kInfo;
  const std::string v = env;
  if (v == "error") return Level::kError;
  if (v == "debug") return Level::kDebug;
  if (v != "info") std::cerr << "fabrica: unknown FABRICA_LOG value '" << v << "', using info\n";
  return Level::kInfo;
}

void log(Level level, const std::string& msg) {
  static const Level threshold = log_level();
  if (level > threshold) return;
  std::cerr << "fabrica: " << msg << "\n";
}

fabrica::Vec parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw fabrica::ConfigError(flag + ": '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw fabrica::ConfigError(flag + ": expected a comma-separated list");
  return fabrica::Vec::Map(values.data(), static_cast<int>(values.size()));
}

struct Overrides {
  std::string out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::string> integrator;
};

void apply(const Overrides& o, fabrica::ExperimentConfig& c) {
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.jobs) {
    if (*o.jobs < 1) throw fabrica::ConfigError("--jobs: must be at least 1");
    c.jobs = *o.jobs;
  }
  if (o.seed) c.seed = *o.seed;
  if (o.dt) {
    if (!(*o.dt > 0.0)) throw fabrica::ConfigError("--dt: must be positive");
    c.integrator.dt = *o.dt;
  }
  if (o.integrator) c.integrator.scheme = fabrica::parse_scheme(*o.integrator);
  c.propagate();
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--dt", o.dt, "Integrator step");
  cmd->add_option("--integrator", o.integrator, "euler or rk4")
      ->check(CLI::IsMember({"euler", "rk4"}));
}

int report_violations(const fabrica::RunReport& report) {
  for (const auto& p : report.properties) {
    if (!p.passed()) {
      std::cerr << "fabrica: invariant violated: " << p.name << " worst " << p.worst
                << " (tolerance " << p.tolerance << ", " << p.failures << "/" << p.samples
                << " samples failed)\n";
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric fabric experiments and invariant checks"};
  app.require_subcommand(1);

  std::string run_path, run_config;
  Overrides run_over;
  CLI::App* run = app.add_subcommand("run", "Execute an experiment config and write its outputs");
  run->add_option("path", run_path, "Experiment config file");
  run->add_option("--config", run_config, "Experiment config file");
  add_overrides(run, run_over);

  std::string check_config;
  Overrides check_over;
  CLI::App* check = app.add_subcommand("check", "Run the invariant suite");
  check->add_option("--config", check_config, "Invariants config file");
  add_overrides(check, check_over);

  std::string demo_qd = "1,0", demo_pi = "2,3";
  CLI::App* demo = app.add_subcommand("demo-energize", "Energize pi under the Euclidean energy");
  demo->add_option("--qd", demo_qd, "Velocity, comma separated");
  demo->add_option("--pi", demo_pi, "Geometry acceleration, comma separated");

  std::string schema_out;
  bool schema_metrics = false;
  CLI::App* schema = app.add_subcommand("schema", "Print the config JSON schema");
  schema->add_option("--out", schema_out, "Write to this file instead of stdout");
  schema->add_flag("--metrics", schema_metrics, "Print the metrics.json schema instead");

  std::string canonical_path;
  CLI::App* canonical =
      app.add_subcommand("canonical", "Validate a config and print its canonical form");
  canonical->add_option("path", canonical_path, "Experiment config file")->required();

  CLI::App* version = app.add_subcommand("version", "Print build info");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (version->parsed()) {
      std::cout << "fabrica " << FABRICA_VERSION << " (C++" << __cplusplus / 100 % 100
                << ", Eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
                << EIGEN_MINOR_VERSION << ", " << __VERSION__ << ")\n";
      return 0;
    }
    if (schema->parsed()) {
      const std::string text = schema_metrics ? fabrica::metrics_schema() : fabrica::config_schema();
      if (schema_out.empty()) {
        std::cout << text;
      } else {
        fabrica::write_text_file(schema_out, text);
      }
      return 0;
    }
    if (canonical->parsed()) {
      std::cout << fabrica::serialize_config(fabrica::load_config(canonical_path));
      return 0;
    }
    if (demo->parsed()) {
      const fabrica::Vec qd = parse_list(demo_qd, "--qd");
      const fabrica::Vec pi = parse_list(demo_pi, "--pi");
      if (qd.size() != pi.size()) throw fabrica::ConfigError("--qd and --pi must have equal length");
      std::cout << fabrica::format_energize_demo(qd, pi, fabrica::energize_demo(qd, pi));
      return 0;
    }

    fabrica::ExperimentConfig cfg;
    if (run->parsed()) {
      if (run_path.empty() == run_config.empty()) {
        throw fabrica::ConfigError("run: give the config either as an argument or with --config");
      }
      const std::string path = run_path.empty() ? run_config : run_path;
      cfg = fabrica::load_config(path);
      apply(run_over, cfg);
      log(Level::kInfo, "running " + fabrica::kind_name(cfg.kind) + " from " + path + " into " +
                            cfg.output_dir);
    } else {
      if (check_config.empty()) {
        cfg = fabrica::default_config(fabrica::ExperimentKind::kInvariants);
      } else {
        cfg = fabrica::load_config(check_config);
        if (cfg.kind != fabrica::ExperimentKind::kInvariants) {
          throw fabrica::ConfigError(check_config + ": kind: check needs an invariants config");
        }
      }
      apply(check_over, cfg);
      log(Level::kInfo, "checking invariants into " + cfg.output_dir);
    }
    log(Level::kDebug, "effective config:\n" + fabrica::serialize_config(cfg));

    const fabrica::RunReport report = fabrica::run_experiment(
        cfg, cfg.output_dir, [](const std::string& m) { log(Level::kInfo, m); });
    std::cout << report.text;
    if (report.invariant_violation) return report_violations(report);
    return 0;
  } catch (const fabrica::ConfigError& e) {
    std::cerr << "fabrica: config error:\n" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fabrica: runtime failure: " << e.what() << "\n";
    return 3;
  }
}
