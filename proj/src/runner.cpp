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

#include "fabrica/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "fabrica/energize.hpp"
#include "fabrica/errors.hpp"
#include "fabrica/metrics.hpp"

namespace fabrica {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string format_vec(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt("%.17g", v(i));
  return s + ")";
}

void write_csv(const fs::path& root, const std::string& rel, const Rollout& r) {
  const fs::path p = root / rel;
  fs::create_directories(p.parent_path());
  write_text_file(p.string(), rollout_csv(r));
}

RunReport run_particles_experiment(const ExperimentConfig& c, const fs::path& out,
                                   const ProgressFn& progress) {
  const ParticleExperiment& e = c.particles;
  if (progress) {
    progress("particles: " + std::to_string(e.variants.size()) + " variants x " +
             std::to_string(e.speeds.size()) + " speeds x " +
             std::to_string(e.world.starts.size()) + " starts");
  }
  const std::vector<ParticleRun> runs = run_particles(e.world, e.params, e.variants, e.speeds, c.jobs);

  RunReport report;
  report.metrics.kind = kind_name(c.kind);
  report.metrics.seed = c.seed;
  int converged = 0, off_centerline = 0, stalled = 0, penetrated = 0;
  for (const ParticleRun& r : runs) {
    RunMetrics m;
    m.variant = variant_name(r.variant);
    m.id = m.variant + "_v" + fmt("%g", r.v_d) + "_p" + std::to_string(r.index);
    m.csv = "particles/" + m.id + ".csv";
    m.v_d = r.v_d;
    m.index = r.index;
    m.centerline = r.centerline;
    m.converged = r.rollout.converged;
    m.final_error = r.rollout.final_error;
    m.min_clearance = r.rollout.min_clearance;
    m.energy_drift_rel = r.rollout.energy_drift_rel;
    if (r.v_d != e.speeds.front()) {
      for (const ParticleRun& ref : runs) {
        if (ref.variant == r.variant && ref.index == r.index && ref.v_d == e.speeds.front()) {
          m.hausdorff_to_ref = hausdorff_distance(r.rollout.path(), ref.rollout.path());
        }
      }
    }
    m.extra["final_time"] = r.rollout.final_time;
    m.extra["max_speed"] = r.rollout.max_speed;
    m.extra["final_projected_gradient"] = r.rollout.final_projected_gradient;
    m.extra["settled"] = r.rollout.settled ? 1.0 : 0.0;
    m.extra["band_enter_time"] = r.rollout.band_enter_time;
    m.extra["gate_time"] = r.rollout.gate_time;
    write_csv(out, m.csv, r.rollout);
    report.metrics.runs.push_back(std::move(m));

    if (!r.centerline) {
      ++off_centerline;
      converged += r.rollout.converged;
    } else {
      stalled += r.rollout.settled && !r.rollout.converged;
    }
    penetrated += r.rollout.penetrated;
  }
  report.metrics.summary = {{"runs", static_cast<double>(runs.size())},
                            {"off_centerline_converged", static_cast<double>(converged)},
                            {"off_centerline_runs", static_cast<double>(off_centerline)},
                            {"centerline_stalled", static_cast<double>(stalled)},
                            {"penetrated", static_cast<double>(penetrated)}};
  report.text = "particles: " + std::to_string(converged) + "/" + std::to_string(off_centerline) +
                " off-centerline runs converged, " + std::to_string(stalled) +
                " centerline runs stalled, " + std::to_string(penetrated) + " penetrations\n";
  return report;
}

RunReport run_arm_wall_experiment(const ExperimentConfig& c, const fs::path& out,
                                  const ProgressFn& progress) {
  const ArmWallExperiment& e = c.arm_wall;
  const int n = static_cast<int>(e.variants.size());
  std::vector<WallResult> results(n);
  if (progress) progress("arm_wall: " + std::to_string(n) + " variants");
  run_parallel(n, c.jobs, [&](int i) {
    results[i] = run_wall_experiment(e.scene, e.params, e.schedule, e.variants[i], e.rollout);
  });

  RunReport report;
  report.metrics.kind = kind_name(c.kind);
  report.metrics.seed = c.seed;
  for (const WallResult& w : results) {
    RunMetrics m;
    m.variant = arm_variant_name(w.variant);
    m.id = m.variant;
    m.csv = "arm_wall/" + m.id + ".csv";
    std::vector<double> twd, ete, ewd;
    bool all_stationary = !w.rows.empty();
    int penetrations = 0;
    m.min_clearance = std::numeric_limits<double>::infinity();
    for (const WallRow& r : w.rows) {
      twd.push_back(r.twd);
      ete.push_back(r.ete);
      ewd.push_back(r.ewd);
      all_stationary = all_stationary && r.final_speed < e.rollout.settle_speed &&
                       r.projected_gradient < e.rollout.stationary_gradient;
      penetrations += r.penetrated;
      m.min_clearance = std::min(m.min_clearance, r.min_clearance);
    }
    m.converged = all_stationary && penetrations == 0;
    m.final_error = w.rows.empty() ? 0.0 : w.rows.back().ete;
    m.energy_drift_rel = w.trajectory.energy_drift_rel;
    m.twd = twd;
    m.ete = ete;
    m.ewd = ewd;
    m.extra["rows"] = static_cast<double>(w.rows.size());
    m.extra["penetrations"] = penetrations;
    m.extra["final_time"] = w.trajectory.final_time;
    write_csv(out, m.csv, w.trajectory);
    report.text += m.variant + ":\n";
    for (const WallRow& r : w.rows) {
      report.text += "  twd " + fmt("%+.3f", r.twd) + "  ete " + fmt("%.3e", r.ete) + "  ewd " +
                     fmt("%.4f", r.ewd) + (r.penetrated ? "  penetrated" : "") + "\n";
    }
    report.metrics.runs.push_back(std::move(m));
  }
  return report;
}

RunReport run_arm_constraint_experiment(const ExperimentConfig& c, const fs::path& out,
                                        const ProgressFn& progress) {
  if (progress) progress("arm_constraint: penalty rollout and path comparison");
  const ConstraintResult r = run_constraint_experiment(c.arm_constraint);
  RunReport report;
  report.metrics.kind = kind_name(c.kind);
  report.metrics.seed = c.seed;
  RunMetrics m;
  m.variant = arm_variant_name(ArmVariant::kFabric);
  m.id = "penalty";
  m.csv = "arm_constraint/penalty.csv";
  m.converged = r.settled && r.stationary;
  m.final_error = r.final_distance;
  m.min_clearance = r.trajectory.min_clearance;
  m.energy_drift_rel = r.trajectory.energy_drift_rel;
  m.extra["max_violation"] = r.max_violation;
  m.extra["path_difference"] = r.path_difference;
  m.extra["comparison_violation"] = r.comparison_violation;
  m.extra["final_projected_gradient"] = r.final_projected_gradient;
  m.extra["final_speed"] = r.final_speed;
  m.extra["final_time"] = r.final_time;
  write_csv(out, m.csv, r.trajectory);
  report.metrics.runs.push_back(std::move(m));
  report.text = "arm_constraint: max |C| " + fmt("%.3e", r.max_violation) +
                ", distance to closest feasible point " + fmt("%.3e", r.final_distance) +
                ", multiplier vs projector " + fmt("%.3e", r.path_difference) +
                (r.settled ? ", settled" : ", not settled") + "\n";
  return report;
}

RunReport run_invariants(const ExperimentConfig& c, const fs::path& out, const ProgressFn& progress) {
  if (progress) progress("invariants: running the property suite");
  RunReport report;
  report.properties = run_invariant_suite(c.invariants);
  int failed = 0;
  for (const auto& p : report.properties) {
    report.text += format_property(p) + "\n";
    failed += !p.passed();
  }
  report.invariant_violation = failed > 0;
  report.text += std::to_string(report.properties.size() - failed) + "/" +
                 std::to_string(report.properties.size()) + " properties passed\n";
  write_text_file((out / "properties.json").string(), properties_json(report.properties));
  return report;
}

RunReport run_energize_demo(const ExperimentConfig& c, const fs::path& out) {
  const EnergizeDemo& d = c.energize_demo;
  const EnergizeDemoResult r = energize_demo(d.qd, d.pi);
  RunReport report;
  report.text = format_energize_demo(d.qd, d.pi, r);
  nlohmann::json j = {{"qd", std::vector<double>(d.qd.data(), d.qd.data() + d.qd.size())},
                      {"pi", std::vector<double>(d.pi.data(), d.pi.data() + d.pi.size())},
                      {"alpha", r.alpha},
                      {"accel", std::vector<double>(r.accel.data(), r.accel.data() + r.accel.size())}};
  write_text_file((out / "energize_demo.json").string(), j.dump(2) + "\n");
  return report;
}

}  // namespace

EnergizeDemoResult energize_demo(const Vec& qd, const Vec& pi) {
  if (qd.size() != pi.size() || qd.size() == 0) {
    throw PreconditionError("qd and pi must be nonempty and of equal length");
  }
  GeometryPolicy g;
  g.name = "constant";
  g.eval = [pi](const Vec&, const Vec&) { return pi; };
  const EnergizedFabric f = energize(euclidean_energy(static_cast<int>(qd.size())), g);
  const auto e = f.evaluate(State(Vec::Zero(qd.size()), qd));
  return {e.alpha, e.accel};
}

std::string format_energize_demo(const Vec& qd, const Vec& pi, const EnergizeDemoResult& r) {
  return "energy: euclidean 1/2 |qd|^2\nqd = " + format_vec(qd) + "\npi = " + format_vec(pi) +
         "\nalpha = " + fmt("%.17g", r.alpha) + "\naccel = " + format_vec(r.accel) + "\n";
}

std::string format_property(const PropertyResult& p) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s %-48s passed %d/%d  worst %.3e  tol %.1e",
                p.passed() ? "PASS" : "FAIL", p.name.c_str(), p.samples - p.failures, p.samples,
                p.worst, p.tolerance);
  return buf;
}

std::string properties_json(const std::vector<PropertyResult>& props) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : props) {
    a.push_back({{"name", p.name},
                 {"passed", p.passed()},
                 {"samples", p.samples},
                 {"failures", p.failures},
                 {"worst", p.worst},
                 {"tolerance", p.tolerance}});
  }
  return nlohmann::json{{"properties", a}}.dump(2) + "\n";
}

RunReport run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                         const ProgressFn& progress) {
  const fs::path out(out_dir);
  fs::create_directories(out);
  write_text_file((out / "config.json").string(), serialize_config(config));
  RunReport report;
  switch (config.kind) {
    case ExperimentKind::kParticles: report = run_particles_experiment(config, out, progress); break;
    case ExperimentKind::kArmWall: report = run_arm_wall_experiment(config, out, progress); break;
    case ExperimentKind::kArmConstraint:
      report = run_arm_constraint_experiment(config, out, progress);
      break;
    case ExperimentKind::kInvariants: return run_invariants(config, out, progress);
    case ExperimentKind::kEnergizeDemo: return run_energize_demo(config, out);
  }
  write_text_file((out / "metrics.json").string(), metrics_json(report.metrics));
  return report;
}

}  // namespace fabrica
