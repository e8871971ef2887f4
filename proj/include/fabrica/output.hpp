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

// Trajectory CSV and metrics.json writers. Every run in a metrics file
// carries the same keys; inapplicable values are written as null.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fabrica/sim.hpp"

namespace fabrica {

// t,q0..q{d-1},qd0..qd{d-1},H,Le,Lex,min_dist
std::string csv_header(int dim);
// Header plus one row per recorded sample, 17 significant digits.
std::string rollout_csv(const Rollout& r);
void write_text_file(const std::string& path, const std::string& text);

struct RunMetrics {
  std::string id;
  std::string variant;
  std::string csv;  // path relative to the output directory
  std::optional<double> v_d;
  std::optional<int> index;
  std::optional<bool> centerline;

  bool converged = false;
  double final_error = 0.0;
  double min_clearance = 0.0;
  std::optional<double> hausdorff_to_ref;
  double energy_drift_rel = 0.0;
  // Arm wall runs: one entry per target wall distance.
  std::optional<std::vector<double>> twd;
  std::optional<std::vector<double>> ete;
  std::optional<std::vector<double>> ewd;
  std::map<std::string, double> extra;
};

struct MetricsFile {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<RunMetrics> runs;
  std::map<std::string, double> summary;
};

std::string metrics_json(const MetricsFile& m);
// JSON Schema of metrics_json output, with units in the descriptions.
std::string metrics_schema();

}  // namespace fabrica
