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

#include "fabrica/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace fabrica {

ForcedFabric::Eval ForcedFabric::evaluate(const State& s, const SpeedControlState& sc) const {
  Eval e;
  e.component = tree_evaluate(tree, s);
  const Mat& M = e.component.energy.M;
  e.pi = -solve_metric(M, e.component.force, eps_M);
  e.forced = e.pi - solve_metric(M, e.component.potential_gradient, eps_M);
  const Vec err = goal_error ? goal_error(s.q) : Vec(s.q);
  e.reg = regulation_coefficient(s, err, e.pi, e.forced, e.component.energy, speed, sc);
  e.accel = e.forced + e.reg.alpha_reg * s.qd;
  return e;
}

Policy ForcedFabric::policy(const SpeedControlState& sc) const {
  return [this, sc](const State& s) { return evaluate(s, sc).accel; };
}

Path Rollout::path() const { return q; }

Rollout rollout(const ForcedFabric& fabric, const State& s0, const RolloutOptions& opt,
                const std::function<double(const Vec&)>& clearance, SpeedControlState& sc,
                double t0) {
  opt.integrator.validate();
  Rollout r;
  r.dim = s0.dim();
  State s = s0;
  double t = t0;
  const double dt = opt.integrator.dt;
  const long n_steps = static_cast<long>(std::llround(opt.t_max / dt));
  double settle_clock = 0.0;
  double H_latch = 0.0;
  bool in_band = false;
  r.min_clearance = clearance ? clearance(s.q) : 0.0;

  auto record = [&](const ForcedFabric::Eval& e, double dist) {
    r.t.push_back(t);
    r.q.push_back(s.q);
    r.qd.push_back(s.qd);
    r.Le.push_back(e.component.energy_value);
    r.H.push_back(e.component.energy_value + e.component.potential_value);
    r.Lex.push_back(e.reg.L_ex);
    r.min_dist.push_back(dist);
  };

  for (long k = 0;; ++k) {
    ForcedFabric::Eval e;
    try {
      update_speed_state(s, fabric.goal_error ? fabric.goal_error(s.q) : s.q, fabric.speed, sc);
      e = fabric.evaluate(s, sc);
    } catch (const PenetrationError& ex) {
      r.penetrated = true;
      r.events.push_back(std::string("penetration: ") + ex.what());
      break;
    } catch (const Error& ex) {
      r.diverged = true;
      r.events.push_back(std::string("divergence: ") + ex.what());
      break;
    }
    const double dist = clearance ? clearance(s.q) : 0.0;
    r.min_clearance = std::min(r.min_clearance, dist);
    const double speed = s.qd.norm();
    r.max_speed = std::max(r.max_speed, speed);
    const double H = e.component.energy_value + e.component.potential_value;

    if (sc.boost_latched_off && r.latch_time < 0.0) {
      r.latch_time = t;
      H_latch = H;
    } else if (r.latch_time >= 0.0) {
      r.energy_drift_rel =
          std::max(r.energy_drift_rel, (H - H_latch) / std::max(std::abs(H_latch), 1e-12));
    }

    r.min_gate = std::min(r.min_gate, e.reg.s_beta);
    r.max_gate = std::max(r.max_gate, e.reg.s_beta);
    r.min_eta = std::min(r.min_eta, e.reg.eta);
    r.max_eta = std::max(r.max_eta, e.reg.eta);
    if (r.gate_time < 0.0 && e.reg.s_beta >= opt.gate_engaged) r.gate_time = t;
    if (r.gate_time < 0.0) {
      const double ratio = e.reg.L_ex / fabric.speed.target_energy;
      const bool inside = std::abs(ratio - 1.0) <= opt.band;
      if (inside && r.band_enter_time < 0.0) r.band_enter_time = t;
      if (!inside && in_band && r.band_exit_time < 0.0) r.band_exit_time = t;
      if (inside) in_band = true;
    }

    const bool stride_hit = (k % std::max(1, opt.record_stride)) == 0;
    const Vec err = fabric.goal_error ? fabric.goal_error(s.q) : s.q;
    if (speed < opt.settle_speed) {
      settle_clock += dt;
    } else {
      settle_clock = 0.0;
    }
    const bool converged = err.norm() < opt.converge_tol && speed < opt.converge_tol;
    const bool settled = settle_clock >= opt.settle_time - 1e-12;
    // Near the goal the convergence test decides; a settle there is a slow approach.
    const bool stalled = settled && e.reg.s_beta < 0.5;
    bool stationary = false;
    if (settled && opt.stationary_gradient > 0.0) {
      const Mat J = fabric.active_constraints ? fabric.active_constraints(s.q) : Mat(0, s.dim());
      stationary = projected_gradient_norm(e.component.energy.M, J,
                                           e.component.potential_gradient) <
                   opt.stationary_gradient;
    }
    const bool done = k >= n_steps || (opt.stop_on_converge && converged) ||
                      (opt.stop_on_settle && stalled) || stationary;
    if (stride_hit || done) record(e, dist);
    if (done) {
      r.converged = converged;
      r.settled = settled;
      r.stationary = stationary;
      break;
    }
    try {
      s = step(fabric.policy(sc), s, opt.integrator);
    } catch (const PenetrationError& ex) {
      r.penetrated = true;
      r.events.push_back(std::string("penetration: ") + ex.what());
      break;
    } catch (const Error& ex) {
      r.diverged = true;
      r.events.push_back(std::string("divergence: ") + ex.what());
      break;
    }
    t += dt;
  }
  r.final_time = t;
  r.final_state = s;
  r.final_speed = s.qd.norm();
  r.final_error = (fabric.goal_error ? fabric.goal_error(s.q) : s.q).norm();
  if (!r.penetrated && !r.diverged) {
    try {
      const FabricComponent c = tree_evaluate(fabric.tree, s);
      const Mat J = fabric.active_constraints ? fabric.active_constraints(s.q) : Mat(0, s.dim());
      r.final_projected_gradient = projected_gradient_norm(c.energy.M, J, c.potential_gradient);
    } catch (const Error& ex) {
      r.events.push_back(std::string("final evaluation: ") + ex.what());
      r.final_projected_gradient = std::nan("");
    }
  }
  if (r.settled && !r.converged) r.events.push_back("stall");
  return r;
}

void run_parallel(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  jobs = std::clamp(jobs, 1, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fabrica
