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

#include "fabrica/core.hpp"
#include "fabrica/energize.hpp"
#include "fabrica/lagrangian.hpp"

namespace fabrica {

struct SpeedControlConfig {
  EnergyFunction execution_energy;
  double target_energy = 2.0;  // L_ex_d
  double alpha_eta = 20.0;
  double alpha_shift = 0.0;
  double B = 6.0;         // peak damping near the goal
  double B_floor = 0.5;   // baseline damping
  double alpha_beta = 4.0;
  double r = 0.5;         // gate radius
  double boost_gain = 8.0;
  double eps = 1e-6;
  bool eta_blend_enabled = true;
  // Also latch the boost off once L_ex has reached 0.95 of the target and
  // later falls below stall_fraction^2 of it. Zero disables.
  double stall_fraction = 0.0;
  double eps_v = kVelocityFloor;

  void validate() const;
};

struct SpeedControlState {
  bool boost_latched_off = false;
  bool reached_target = false;
};

double damping_gate(const Vec& q_to_goal, const SpeedControlConfig& config);
double energy_gate(double L_ex, const SpeedControlConfig& config);

struct Regulation {
  double alpha_reg = 0.0;
  double alpha_ex0 = 0.0;
  double alpha_expsi = 0.0;
  double alpha_exeta = 0.0;
  double alpha_Le = 0.0;
  double beta_reg = 0.0;
  double alpha_boost = 0.0;
  double s_beta = 0.0;
  double eta = 0.0;
  double L_ex = 0.0;
};

// alpha_boost = k eta (1 - s_beta) / (|qd| + eps), zero once latched off.
double boost_coefficient(const State& state, const Vec& q_to_goal, const SpeedControlConfig& config,
                         const SpeedControlState& sc_state);

// Advances the latch at an accepted state. The latch never reopens.
void update_speed_state(const State& state, const Vec& q_to_goal,
                        const SpeedControlConfig& config, SpeedControlState& sc_state);

// pi is the geometry, forced_policy = -M^-1 dpsi + pi, fabric_energy_spec the
// summed (M, xi). The returned alpha_reg multiplies qd.
Regulation regulation_coefficient(const State& state, const Vec& q_to_goal, const Vec& pi,
                                  const Vec& forced_policy, const Spec& fabric_energy_spec,
                                  const SpeedControlConfig& config,
                                  const SpeedControlState& sc_state);

}  // namespace fabrica
