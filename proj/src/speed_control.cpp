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

#include "fabrica/speed_control.hpp"

#include <algorithm>
#include <cmath>

namespace fabrica {

void SpeedControlConfig::validate() const {
  if (!execution_energy.eval) throw PreconditionError("speed control needs an execution energy");
  if (!(B > 0.0 && B_floor > 0.0 && alpha_beta > 0.0 && r > 0.0 && alpha_eta > 0.0)) {
    throw PreconditionError("speed control gains B, B_floor, alpha_beta, r, alpha_eta must be positive");
  }
  if (!(target_energy > 0.0)) throw PreconditionError("target execution energy must be positive");
  if (!(eps > 0.0)) throw PreconditionError("boost regularizer must be positive");
  if (boost_gain < 0.0) throw PreconditionError("boost gain must be nonnegative");
  if (!(stall_fraction >= 0.0 && stall_fraction <= 1.0)) throw PreconditionError("stall fraction must lie in [0, 1]");
}

double damping_gate(const Vec& q_to_goal, const SpeedControlConfig& c) {
  return 0.5 * (std::tanh(-c.alpha_beta * (q_to_goal.norm() - c.r)) + 1.0);
}

double energy_gate(double L_ex, const SpeedControlConfig& c) {
  return 0.5 * (std::tanh(-c.alpha_eta * (L_ex - c.target_energy) - c.alpha_shift) + 1.0);
}

void update_speed_state(const State& state, const Vec& q_to_goal, const SpeedControlConfig& c,
                        SpeedControlState& sc) {
  const double L_ex = c.execution_energy(state.q, state.qd);
  if (damping_gate(q_to_goal, c) > 0.5) sc.boost_latched_off = true;
  if (L_ex >= 0.95 * c.target_energy) sc.reached_target = true;
  if (c.stall_fraction > 0.0 && sc.reached_target &&
      L_ex < c.stall_fraction * c.stall_fraction * c.target_energy) {
    sc.boost_latched_off = true;
  }
}

double boost_coefficient(const State& state, const Vec& q_to_goal, const SpeedControlConfig& c,
                         const SpeedControlState& sc) {
  if (sc.boost_latched_off || c.boost_gain == 0.0) return 0.0;
  const double s_beta = damping_gate(q_to_goal, c);
  if (s_beta > 0.5) return 0.0;
  const double L_ex = c.execution_energy(state.q, state.qd);
  const double eta = c.eta_blend_enabled ? energy_gate(L_ex, c) : 1.0;
  return c.boost_gain * eta * (1.0 - s_beta) / (state.qd.norm() + c.eps);
}

Regulation regulation_coefficient(const State& state, const Vec& q_to_goal, const Vec& pi,
                                  const Vec& forced_policy, const Spec& fabric_energy_spec,
                                  const SpeedControlConfig& c,
                                  const SpeedControlState& sc) {
  Regulation r;
  r.s_beta = damping_gate(q_to_goal, c);
  r.L_ex = c.execution_energy(state.q, state.qd);
  r.eta = c.eta_blend_enabled ? energy_gate(r.L_ex, c) : 1.0;
  r.alpha_boost = boost_coefficient(state, q_to_goal, c, sc);
  if (state.qd.norm() <= c.eps_v) {
    r.alpha_reg = 0.0;
    return r;
  }
  const Spec ex = euler_lagrange(c.execution_energy,
                                 c.execution_energy.has_analytic()
                                     ? DiffStrategy::analytic()
                                     : DiffStrategy::finite_difference(),
                                 state);
  r.alpha_ex0 = energization_coefficient(ex, pi, state.qd, c.eps_v);
  r.alpha_expsi = energization_coefficient(ex, forced_policy, state.qd, c.eps_v);
  r.alpha_exeta = r.eta * r.alpha_ex0 + (1.0 - r.eta) * r.alpha_expsi;
  r.alpha_Le = energization_coefficient(fabric_energy_spec, pi, state.qd, c.eps_v);
  r.beta_reg = r.s_beta * c.B + c.B_floor + std::max(0.0, r.alpha_exeta - r.alpha_Le);
  r.alpha_reg = r.alpha_exeta - r.beta_reg + r.alpha_boost;
  return r;
}

}  // namespace fabrica
