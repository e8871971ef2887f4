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
#include <random>

#include "fabrica/constraint.hpp"
#include "fabrica/errors.hpp"
#include "fabrica/integrator.hpp"
#include "fabrica/transform.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// C(q) = q_1
EqualityConstraint axis_constraint() {
  Mat A(1, 2);
  A << 0, 1;
  return EqualityConstraint::from_map(linear_map(A));
}

// C(q) = |q|^2 - 1
EqualityConstraint circle_constraint() {
  EqualityConstraint c;
  c.name = "circle";
  c.dim = 2;
  c.rows = 1;
  c.C = [](const Vec& q) { return Vec::Constant(1, q.squaredNorm() - 1.0); };
  c.jacobian = [](const Vec& q) { return Mat(2.0 * q.transpose()); };
  c.curvature = [](const Vec&, const Vec& qd) { return Vec::Constant(1, 2.0 * qd.squaredNorm()); };
  return c;
}

ConstrainedTerms free_terms(const Mat& M, const Vec& force) {
  const int d = static_cast<int>(M.rows());
  return {M, Vec::Zero(d), force, Vec::Zero(d), Mat::Zero(d, d)};
}

}  // namespace

TEST_CASE("projectors for an axis constraint under a unit metric") {
  Mat J(1, 2);
  J << 0, 1;
  const Projectors p = constraint_projectors(Mat::Identity(2, 2), J);
  Mat perp(2, 2), par(2, 2);
  perp << 0, 0, 0, 1;
  par << 1, 0, 0, 0;
  CHECK(oracle::max_abs(p.perp - perp) < 1e-12);
  CHECK(oracle::max_abs(p.par - par) < 1e-12);
}

TEST_CASE("projector identities for random metrics") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const Mat M = oracle::random_spd(rng, 4);
    const Mat J = oracle::random_mat(rng, 2, 4);
    const Projectors p = constraint_projectors(M, J, 0.0);
    const Mat Minv = oracle::gauss_inverse(M);
    const Mat perp = J.transpose() * oracle::gauss_inverse(J * Minv * J.transpose()) * J * Minv;
    CHECK(oracle::max_abs(p.perp - perp) < 1e-9);
    CHECK(oracle::max_abs(p.perp + p.par - Mat::Identity(4, 4)) < 1e-9);
    CHECK(oracle::max_abs(p.perp * p.perp - p.perp) < 1e-9);
    // Parallel forces do no work along the constraint normal in the M-metric.
    CHECK(oracle::max_abs(J * Minv * p.par) < 1e-9);
  }
}

TEST_CASE("constrained fabric stays on the axis") {
  const EqualityConstraint c = axis_constraint();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Mat M = oracle::random_spd(rng, 2);
    const ConstrainedTerms t = free_terms(M, oracle::random_vec(rng, 2));
    const State s(v2(oracle::random_vec(rng, 1)(0), 0.0), v2(oracle::random_vec(rng, 1)(0), 0.0));
    CHECK(std::abs(constrain_fabric(t, c, s)(1)) < 1e-12);
  }
  CHECK_THROWS_AS(constrain_fabric(free_terms(Mat::Identity(2, 2), Vec::Zero(2)), c,
                                   State(v2(0, 0.1), Vec::Zero(2))),
                  PreconditionError);
}

TEST_CASE("constrained motion on a circle") {
  const EqualityConstraint c = circle_constraint();
  const Vec g = v2(0.0, 1.0);
  const ConstrainedTerms t = free_terms(Mat::Identity(2, 2), g);
  const Integrator rk4{Scheme::kRK4, 1e-3};
  State s(v2(1, 0), v2(0, 1.5));
  double worst = 0.0;
  ConstrainOptions opts;
  opts.feasibility_tol = 1e-3;
  for (int i = 0; i < 5000; ++i) {
    s = step([&](const State& x) { return constrain_fabric(t, c, x, opts); }, s, rk4);
    worst = std::max(worst, std::abs(c.C(s.q)(0)));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("multipliers") {
  const EqualityConstraint c = axis_constraint();
  // A force along the free direction needs no multiplier.
  const State s(v2(0.5, 0.0), v2(1.0, 0.0));
  CHECK(std::abs(lagrange_multipliers(Mat::Identity(2, 2), v2(3, 0), c, s)(0)) < 1e-14);
  // A static load along the normal is held exactly.
  const State rest(v2(0.5, 0.0), Vec::Zero(2));
  const Vec lambda = lagrange_multipliers(Mat::Identity(2, 2), v2(0, 9.8), c, rest);
  CHECK(lambda(0) == doctest::Approx(-9.8));
  CHECK(oracle::max_abs(multiplier_accel(Mat::Identity(2, 2), v2(0, 9.8), c, rest)) < 1e-12);
}

TEST_CASE("multiplier and projector accelerations agree") {
  const EqualityConstraint c = circle_constraint();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    const Mat M = oracle::random_spd(rng, 2);
    const ConstrainedTerms t{M, oracle::random_vec(rng, 2), oracle::random_vec(rng, 2),
                             oracle::random_vec(rng, 2), oracle::random_spd(rng, 2)};
    const double a = oracle::random_vec(rng, 1)(0);
    const Vec q = v2(std::cos(a), std::sin(a));
    const Vec qd = v2(-q(1), q(0)) * oracle::random_vec(rng, 1)(0);
    const State s(q, qd);
    const Vec f = t.xi + t.f_f + t.dpsi + t.B * qd;
    const Vec a1 = constrain_fabric(t, c, s);
    const Vec a2 = multiplier_accel(M, f, c, s);
    CHECK(oracle::max_abs(a1 - a2) < 1e-9 * (1 + a1.norm()));
    // Acceleration is tangent to second order: J qdd + Jdot qd = 0.
    CHECK(std::abs(c.jacobian(q).row(0).dot(a1) + c.curvature(q, qd)(0)) < 1e-9 * (1 + a1.norm()));
  }
}

TEST_CASE("feasibility projection") {
  const EqualityConstraint c = circle_constraint();
  const State p = project_feasible(c, State(v2(1.3, 0.4), v2(1.0, 1.0)));
  CHECK(std::abs(c.C(p.q)(0)) < 1e-12);
  CHECK(std::abs(p.q.dot(p.qd)) < 1e-12);
}

TEST_CASE("penalty step without a penalty is the explicit fabric step") {
  const PenaltyFabric fabric = [](const State& s) {
    return PenaltyFabricEval{Mat::Identity(2, 2) * 2.0, v2(-s.q(0), 0.5 - s.qd(1))};
  };
  PenaltySolverConfig cfg;
  cfg.lambda = 0.0;
  const Vec q_prev = v2(0.3, 0.2), q_k = v2(0.31, 0.19);
  const PenaltyStepResult r = penalty_step(fabric, axis_constraint(), q_prev, q_k, cfg);
  const State s(q_k, (q_k - q_prev) / cfg.dt);
  const Vec expect = 2.0 * q_k - q_prev + cfg.dt * cfg.dt * fabric(s).accel_desired;
  CHECK(oracle::max_abs(r.q_next - expect) < 1e-12);

  cfg.lambda = 1e6;
  const PenaltyStepResult pen = penalty_step(fabric, axis_constraint(), q_prev, q_k, cfg);
  CHECK(std::abs(pen.q_next(1)) < 1e-5);
}
