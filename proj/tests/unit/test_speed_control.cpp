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

#include <cmath>

#include "fabrica/speed_control.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

SpeedControlConfig config() {
  SpeedControlConfig c;
  c.execution_energy = euclidean_energy(2);
  c.target_energy = 2.0;
  return c;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("damping gate") {
  SpeedControlConfig c = config();
  c.alpha_beta = 4.0;
  c.r = 0.5;
  CHECK(damping_gate(v2(0.5, 0.0), c) == doctest::Approx(0.5).epsilon(1e-15));
  c.alpha_beta = 10.0;
  c.r = 0.2;
  CHECK(damping_gate(v2(0.1, 0.0), c) == doctest::Approx(0.5 * (std::tanh(1.0) + 1.0)));
  CHECK(damping_gate(v2(0.1, 0.0), c) == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(damping_gate(Vec::Zero(2), c) == doctest::Approx(0.9820).epsilon(1e-4));
  CHECK(damping_gate(v2(100.0, 0.0), c) == 0.0);
}

TEST_CASE("energy gate saturates on both sides of the target") {
  const SpeedControlConfig c = config();
  CHECK(energy_gate(c.target_energy, c) == doctest::Approx(0.5));
  CHECK(energy_gate(0.0, c) > 1.0 - 1e-12);
  CHECK(energy_gate(10.0, c) < 1e-12);
}

TEST_CASE("boost coefficient") {
  SpeedControlConfig c = config();
  const State s(Vec::Zero(2), v2(0.1, 0.0));
  const Vec far = v2(5.0, 0.0);
  SpeedControlState sc;
  const double eta = energy_gate(c.execution_energy(s.q, s.qd), c);
  const double expect = c.boost_gain * eta * (1.0 - damping_gate(far, c)) / (0.1 + c.eps);
  CHECK(boost_coefficient(s, far, c, sc) == doctest::Approx(expect));
  CHECK(boost_coefficient(s, Vec::Zero(2), c, sc) == 0.0);
  sc.boost_latched_off = true;
  CHECK(boost_coefficient(s, far, c, sc) == 0.0);
  c.boost_gain = 0.0;
  CHECK(boost_coefficient(s, far, c, SpeedControlState{}) == 0.0);
}

TEST_CASE("boost latches off near the goal") {
  const SpeedControlConfig c = config();
  SpeedControlState sc;
  update_speed_state(State(Vec::Zero(2), v2(0.1, 0)), v2(5, 0), c, sc);
  CHECK_FALSE(sc.boost_latched_off);
  update_speed_state(State(Vec::Zero(2), v2(0.1, 0)), Vec::Zero(2), c, sc);
  CHECK(sc.boost_latched_off);
}

TEST_CASE("regulation coefficient") {
  SpeedControlConfig c = config();
  c.boost_gain = 0.0;
  const State s(Vec::Zero(2), v2(1.0, 0.0));
  const Vec pi = v2(2.0, 3.0);
  const Vec forced = v2(-1.0, 0.5);
  const Spec fabric{Mat::Identity(2, 2) * 2.0, Vec::Zero(2)};
  const Regulation r = regulation_coefficient(s, v2(3, 0), pi, forced, fabric, c, {});
  // Execution energy 1/2 |qd|^2: alpha = -qd.pi / |qd|^2.
  CHECK(r.alpha_ex0 == doctest::Approx(-2.0));
  CHECK(r.alpha_expsi == doctest::Approx(1.0));
  CHECK(r.alpha_exeta == doctest::Approx(r.eta * -2.0 + (1 - r.eta) * 1.0));
  CHECK(r.alpha_Le == doctest::Approx(-2.0));
  const double beta = r.s_beta * c.B + c.B_floor + std::max(0.0, r.alpha_exeta - r.alpha_Le);
  CHECK(r.beta_reg == doctest::Approx(beta));
  CHECK(r.alpha_reg == doctest::Approx(r.alpha_exeta - beta));
  CHECK(r.beta_reg >= c.B_floor);

  const Regulation rest = regulation_coefficient(State(Vec::Zero(2), Vec::Zero(2)), v2(3, 0), pi,
                                                 forced, fabric, c, {});
  CHECK(rest.alpha_reg == 0.0);
}
