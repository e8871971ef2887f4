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

// Executes a parsed experiment config and writes its outputs.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fabrica/config.hpp"
#include "fabrica/invariants.hpp"
#include "fabrica/output.hpp"

namespace fabrica {

struct EnergizeDemoResult {
  double alpha = 0.0;
  Vec accel;
};

// Energizes pi under the Euclidean energy: accel = pi + alpha qd.
EnergizeDemoResult energize_demo(const Vec& qd, const Vec& pi);
std::string format_energize_demo(const Vec& qd, const Vec& pi, const EnergizeDemoResult& r);

struct RunReport {
  MetricsFile metrics;
  std::vector<PropertyResult> properties;  // invariants runs only
  std::string text;                        // human-readable summary
  bool invariant_violation = false;
};

using ProgressFn = std::function<void(const std::string&)>;

// Writes config.json, per-run CSVs and metrics.json under out_dir (created
// if missing). Invariants runs write properties.json instead of metrics.
RunReport run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                         const ProgressFn& progress = {});

std::string format_property(const PropertyResult& p);
std::string properties_json(const std::vector<PropertyResult>& props);

}  // namespace fabrica
