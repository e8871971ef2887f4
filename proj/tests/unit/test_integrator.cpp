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
#include <numbers>

#include "fabrica/errors.hpp"
#include "fabrica/integrator.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

const Policy oscillator = [](const State& s) { return Vec(-s.q); };

State run(Scheme scheme, double dt, int steps, State s) {
  const Integrator in{scheme, dt};
  for (int i = 0; i < steps; ++i) s = step(oscillator, s, in);
  return s;
}

double energy(const State& s) { return 0.5 * (s.q.squaredNorm() + s.qd.squaredNorm()); }

}  // namespace

TEST_CASE("free motion is exact") {
  const Policy zero = [](const State& s) { return Vec(Vec::Zero(s.dim())); };
  const State s0(Vec::Constant(2, 1.0), Vec::Constant(2, 0.5));
  for (Scheme sc : {Scheme::kEuler, Scheme::kRK4}) {
    const State s1 = step(zero, s0, Integrator{sc, 0.1});
    CHECK(oracle::max_abs(s1.q - Vec::Constant(2, 1.05)) < 1e-15);
    CHECK(oracle::max_abs(s1.qd - s0.qd) == 0.0);
  }
}

TEST_CASE("RK4 closes one oscillator period") {
  const double dt = 1e-3;
  const int n = static_cast<int>(std::lround(2.0 * std::numbers::pi / dt));
  const double T = n * dt;
  const State s = run(Scheme::kRK4, dt, n, State(Vec::Constant(1, 1.0), Vec::Zero(1)));
  CHECK(std::abs(s.q(0) - std::cos(T)) < 1e-6);
  CHECK(std::abs(s.qd(0) + std::sin(T)) < 1e-6);
}

TEST_CASE("RK4 convergence order") {
  const State s0(Vec::Constant(1, 1.0), Vec::Zero(1));
  auto err = [&](double dt) {
    const State s = run(Scheme::kRK4, dt, static_cast<int>(std::lround(1.0 / dt)), s0);
    return std::abs(s.q(0) - std::cos(1.0));
  };
  const double order = std::log2(err(0.02) / err(0.01));
  CHECK(order >= 3.5);
}

TEST_CASE("Euler drifts far more than RK4") {
  const State s0(Vec::Constant(1, 1.0), Vec::Zero(1));
  const double e0 = energy(s0);
  const double de = std::abs(energy(run(Scheme::kEuler, 1e-2, 1000, s0)) - e0);
  const double dr = std::abs(energy(run(Scheme::kRK4, 1e-2, 1000, s0)) - e0);
  CHECK(de >= 100.0 * dr);
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("rk4") == Scheme::kRK4);
  CHECK(scheme_name(Scheme::kEuler) == "euler");
  CHECK_THROWS(parse_scheme("leapfrog"));
  CHECK_THROWS(Integrator{Scheme::kRK4, -1.0}.validate());
}
