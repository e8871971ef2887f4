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

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fabrica/core.hpp"
#include "fabrica/integrator.hpp"
#include "fabrica/metrics.hpp"
#include "fabrica/speed_control.hpp"
#include "fabrica/transform.hpp"

namespace fabrica {

// Root policy qdd = -M~^-1 dpsi~ + pi~ + alpha_reg qd, where pi~ = -M~^-1 f~.
struct ForcedFabric {
  TransformTree tree;
  SpeedControlConfig speed;
  std::function<Vec(const Vec& q)> goal_error;
  // Root-space Jacobian rows of constraints active at q; may be empty.
  std::function<Mat(const Vec& q)> active_constraints;
  double eps_M = kMetricRegularization;

  struct Eval {
    FabricComponent component;
    Vec pi;
    Vec forced;
    Regulation reg;
    Vec accel;
  };

  Eval evaluate(const State& s, const SpeedControlState& sc) const;
  Policy policy(const SpeedControlState& sc) const;
};

struct RolloutOptions {
  Integrator integrator;
  double t_max = 30.0;
  double converge_tol = 1e-3;
  double settle_speed = 1e-3;
  double settle_time = 0.5;
  int record_stride = 10;
  bool stop_on_converge = true;
  bool stop_on_settle = true;
  double gate_engaged = 0.05;  // s_beta level that counts as the gate engaging
  double band = 0.05;          // relative execution-energy band
  // Stop once settled with the projected potential gradient below this. Zero disables.
  double stationary_gradient = 0.0;
};

struct Rollout {
  int dim = 0;
  // Samples every record_stride steps plus the final state.
  std::vector<double> t;
  std::vector<Vec> q;
  std::vector<Vec> qd;
  std::vector<double> H;
  std::vector<double> Le;
  std::vector<double> Lex;
  std::vector<double> min_dist;
  std::vector<std::string> events;

  bool converged = false;
  bool settled = false;
  bool stationary = false;
  bool penetrated = false;
  bool diverged = false;
  double final_time = 0.0;
  State final_state;
  double final_error = 0.0;
  double final_speed = 0.0;
  double final_projected_gradient = 0.0;
  double min_clearance = 0.0;
  double max_speed = 0.0;
  double energy_drift_rel = 0.0;  // max relative rise of H after the boost latch
  double latch_time = -1.0;
  // Execution-energy band tracking before the damping gate engages.
  double band_enter_time = -1.0;
  double band_exit_time = -1.0;
  double gate_time = -1.0;
  double min_gate = 1.0;
  double max_gate = 0.0;
  double min_eta = 1.0;
  double max_eta = 0.0;

  Path path() const;
};

// Integrates a forced fabric from s0. clearance gives the obstacle distance
// recorded in min_dist. sc carries the boost latch across calls.
Rollout rollout(const ForcedFabric& fabric, const State& s0, const RolloutOptions& options,
                const std::function<double(const Vec&)>& clearance, SpeedControlState& sc,
                double t0 = 0.0);

// Runs fn(i) for i in [0, n) on up to jobs threads; results stay indexed.
void run_parallel(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace fabrica
