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

#include "fabrica/components.hpp"
#include "fabrica/errors.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<Vec> plane_samples(int n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(v2(u(rng), u(rng)));
  return out;
}

}  // namespace

TEST_CASE("barrier energy metric") {
  BarrierParams p;
  p.k_b = 1.0;
  const CircularRepulsion c = circular_repulsion(p);
  // L = G_b(x) xd^2 with G_b = k_b / x^2 = 4 at x = 0.5.
  CHECK(c.energy(v1(0.5), v1(1.0)) == doctest::Approx(4.0));
  const Spec s = euler_lagrange(c.energy, DiffStrategy::analytic(), State(v1(0.5), v1(-1.0)));
  CHECK(s.M(0, 0) == doctest::Approx(8.0));
  CHECK(s.f(0) == doctest::Approx(-16.0));
  const Spec fd = euler_lagrange(c.energy, DiffStrategy::finite_difference(), State(v1(0.5), v1(-1.0)));
  CHECK(fd.M(0, 0) == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(fd.f(0) == doctest::Approx(-16.0).epsilon(1e-6));

  p.velocity_gated = true;
  const CircularRepulsion g = circular_repulsion(p);
  const Spec receding = euler_lagrange(g.energy, DiffStrategy::analytic(), State(v1(0.5), v1(1.0)));
  CHECK(receding.M(0, 0) == 0.0);
  CHECK(receding.f(0) == 0.0);
  CHECK(g.geometry(v1(0.5), v1(1.0))(0) == 0.0);
  CHECK(g.geometry(v1(0.5), v1(-1.0))(0) > 0.0);
  CHECK_THROWS_AS(c.energy(v1(-0.1), v1(1.0)), PenetrationError);
}

TEST_CASE("circle distance map") {
  const TaskMap m = circle_distance_map(v2(1.0, 0.0), 0.5);
  CHECK(m.phi(v2(2.0, 0.0))(0) == doctest::Approx(1.0));
  const Mat J = m.jacobian(v2(1.0, 2.0));
  CHECK(oracle::max_abs(J - Mat(v2(0.0, 2.0).transpose())) < 1e-14);
  CHECK_THROWS_AS(m.jacobian(v2(1.0, 0.0)), DomainError);
}

TEST_CASE("point attraction metric and potential") {
  const PointAttractionParams p;
  CHECK(attraction_metric_scale(p, 0.0) == doctest::Approx(p.m_upper));
  CHECK(attraction_metric_scale(p, 100.0) == doctest::Approx(p.m_lower));
  CHECK(oracle::max_abs(attraction_base_gradient(p, Vec::Zero(2))) == 0.0);
  // Far out the base gradient is k times the unit direction.
  CHECK(attraction_base_gradient(p, v2(30.0, 40.0)).norm() == doctest::Approx(p.k));

  const ComponentBundle b = point_attraction(p);
  CHECK(potential_gradient_error(b.potential, plane_samples(50, -3.0, 3.0, 1)) < 1e-6);
  CHECK(b.potential.value(Vec::Zero(2)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.potential.value(v2(1.0, 0.0)) > 0.0);
}

TEST_CASE("joint attraction") {
  const JointAttractionParams p{0.1, 1.0, 1.0};
  const Vec target = v2(0.3, -0.2);
  const ComponentBundle b = joint_attraction(p, target);
  CHECK(oracle::max_abs(b.potential.gradient(target)) == 0.0);
  for (const Vec& x : plane_samples(20, -2.0, 2.0, 3)) {
    CHECK(b.potential.value(x) >= b.potential.value(target));
  }
  CHECK(potential_gradient_error(b.potential, plane_samples(50, -2.0, 2.0, 4)) < 1e-6);
  CHECK(euler_lagrange(b.energy, DiffStrategy::analytic(), State(target, v2(1, 1))).M(0, 0) ==
        doctest::Approx(0.1));
}

TEST_CASE("distance repulsion") {
  DistanceRepulsionParams p;
  p.k = 0.5;
  p.k_b = 1e-3;
  p.k_b_potential = 2e-3;
  p.k_r = 0.05;
  p.alpha = 50.0;
  p.x_o = 0.02;
  const ComponentBundle b = distance_repulsion(p, p);
  const double x = 0.02;
  CHECK(b.potential.gradient(v1(x))(0) ==
        doctest::Approx(-p.k_b_potential / (x * x) - 0.5 * p.k_r));
  // Geometry uses k_b, the potential k_b_potential.
  CHECK(b.geometry(v1(x), v1(-2.0))(0) == doctest::Approx(4.0 * (p.k_b / (x * x) + 0.5 * p.k_r)));
  const Spec approach = euler_lagrange(b.energy, DiffStrategy::analytic(), State(v1(0.1), v1(-1.0)));
  CHECK(approach.M(0, 0) == doctest::Approx(5.0));
  const Spec away = euler_lagrange(b.energy, DiffStrategy::analytic(), State(v1(0.1), v1(1.0)));
  CHECK(away.M(0, 0) == 0.0);
  std::vector<Vec> xs;
  for (double v : {0.01, 0.05, 0.2, 1.0}) xs.push_back(v1(v));
  CHECK(potential_gradient_error(b.potential, xs, 1e-8) < 1e-6);
  p.k = -1.0;
  CHECK_THROWS_AS(distance_repulsion(p, p), PreconditionError);
}

TEST_CASE("end-effector attraction") {
  const EEAttractionParams p{2.0, 0.5, 10.0, 2.0, 10.0};
  const Vec target = v2(0.6, 0.3);
  const ComponentBundle b = ee_attraction(p, p, target);
  // At the target the metric coefficient is (m_upper + m_lower) / 2.
  CHECK(b.energy(target, v2(1.0, 0.0)) == doctest::Approx(0.5 * (p.m_upper + p.m_lower)));
  CHECK(b.energy(v2(50.0, 0.0), v2(1.0, 0.0)) == doctest::Approx(p.m_lower));
  CHECK(oracle::max_abs(b.potential.gradient(target)) == 0.0);
  CHECK(potential_gradient_error(b.potential, plane_samples(50, -1.0, 1.0, 5)) < 1e-6);
}

TEST_CASE("potential symmetry check") {
  const auto curl = [](const Vec& x) { return v2(-x(1), x(0)); };
  const auto samples = plane_samples(10, -1.0, 1.0, 6);
  CHECK(potential_symmetry_check(curl, samples).max_asymmetry == doctest::Approx(2.0).epsilon(1e-6));
  const ComponentBundle b = point_attraction(PointAttractionParams{});
  CHECK(potential_symmetry_check(b.potential.gradient, samples).max_asymmetry < 1e-6);
}

TEST_CASE("HD2 lift of a speed-independent policy") {
  const EnergyFunction scaler = euclidean_energy(2);
  const auto base = [](const Vec& x, const Vec& xd) { return Vec(-x / (1.0 + 0.0 * xd.norm())); };
  std::vector<State> samples;
  for (const Vec& x : plane_samples(5, -1.0, 1.0, 7)) samples.emplace_back(x, v2(0.3, 0.4));
  const GeometryPolicy pi = hd2_from_hd0(base, scaler, nullptr, samples);
  std::vector<State> test;
  for (const Vec& x : plane_samples(10, -1.0, 1.0, 8)) test.emplace_back(x, v2(1.0, -0.5));
  CHECK(geometry_homogeneity_violation(pi, test) < 1e-12);

  const auto speedy = [](const Vec& x, const Vec& xd) { return Vec(-x * xd.norm()); };
  CHECK_THROWS_AS(hd2_from_hd0(speedy, scaler, nullptr, samples), ConstructionError);
}
