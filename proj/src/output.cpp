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

#include "fabrica/output.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fabrica/errors.hpp"

namespace fabrica {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

template <class T>
nlohmann::json nullable(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string csv_header(int dim) {
  std::string h = "t";
  for (int i = 0; i < dim; ++i) h += ",q" + std::to_string(i);
  for (int i = 0; i < dim; ++i) h += ",qd" + std::to_string(i);
  return h + ",H,Le,Lex,min_dist";
}

std::string rollout_csv(const Rollout& r) {
  std::string out = csv_header(r.dim) + "\n";
  out.reserve(out.size() + r.t.size() * (4 + 2 * r.dim) * 24);
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    append_number(out, r.t[k]);
    for (int i = 0; i < r.dim; ++i) {
      out += ',';
      append_number(out, r.q[k](i));
    }
    for (int i = 0; i < r.dim; ++i) {
      out += ',';
      append_number(out, r.qd[k](i));
    }
    for (double v : {r.H[k], r.Le[k], r.Lex[k], r.min_dist[k]}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path);
}

std::string metrics_json(const MetricsFile& m) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : m.runs) {
    runs.push_back({{"id", r.id},
                    {"variant", r.variant},
                    {"csv", r.csv},
                    {"v_d", nullable(r.v_d)},
                    {"index", nullable(r.index)},
                    {"centerline", nullable(r.centerline)},
                    {"converged", r.converged},
                    {"final_error", r.final_error},
                    {"min_clearance", r.min_clearance},
                    {"hausdorff_to_ref", nullable(r.hausdorff_to_ref)},
                    {"energy_drift_rel", r.energy_drift_rel},
                    {"twd", nullable(r.twd)},
                    {"ete", nullable(r.ete)},
                    {"ewd", nullable(r.ewd)},
                    {"extra", r.extra}});
  }
  nlohmann::json j = {{"kind", m.kind}, {"seed", m.seed}, {"runs", runs}, {"summary", m.summary}};
  return j.dump(2) + "\n";
}

std::string metrics_schema() {
  using nlohmann::json;
  auto typed = [](json type, const std::string& description) {
    return json{{"type", type}, {"description", description}};
  };
  auto series = [](const std::string& description) {
    return json{{"type", {"array", "null"}}, {"items", {{"type", "number"}}}, {"description", description}};
  };
  json run = {
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"id", typed("string", "Run identifier, unique within the file")},
        {"variant", typed("string", "Fabric variant name")},
        {"csv", typed("string", "Trajectory CSV path relative to the output directory")},
        {"v_d", typed({"number", "null"}, "Particle target speed [length/s]; null for arm runs")},
        {"index", typed({"integer", "null"}, "Particle start index; null for arm runs")},
        {"centerline", typed({"boolean", "null"}, "Start lies on the obstacle centerline; null for arm runs")},
        {"converged", typed("boolean", "Run reached its goal or stationarity condition")},
        {"final_error", typed("number", "Final goal distance [length]")},
        {"min_clearance", typed("number", "Smallest obstacle or wall clearance over the run [length]")},
        {"hausdorff_to_ref", typed({"number", "null"},
                                   "Hausdorff distance to the same variant and start at the first "
                                   "configured speed [length]; null for the reference speed and arm runs")},
        {"energy_drift_rel", typed("number", "Largest relative rise of the total energy after the boost latches off [1]")},
        {"twd", series("Target-to-wall distance per wall row [length]; null outside the wall experiment")},
        {"ete", series("End-effector target error per wall row [length]")},
        {"ewd", series("Settled end-effector wall distance per wall row [length]")},
        {"extra", {{"type", "object"},
                   {"additionalProperties", {{"type", "number"}}},
                   {"description", "Run-specific diagnostics; times in s, speeds in length/s"}}}}},
      {"required", {"id", "variant", "csv", "v_d", "index", "centerline", "converged", "final_error",
                    "min_clearance", "hausdorff_to_ref", "energy_drift_rel", "twd", "ete", "ewd", "extra"}}};
  json j = {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
            {"title", "fabrica metrics"},
            {"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"kind", {{"enum", {"particles", "arm_wall", "arm_constraint"}}}},
              {"seed", {{"type", "integer"}, {"minimum", 0}}},
              {"runs", {{"type", "array"}, {"items", run}}},
              {"summary", {{"type", "object"},
                           {"additionalProperties", {{"type", "number"}}},
                           {"description", "Experiment-level counts"}}}}},
            {"required", {"kind", "seed", "runs", "summary"}}};
  return j.dump(2) + "\n";
}

}  // namespace fabrica
