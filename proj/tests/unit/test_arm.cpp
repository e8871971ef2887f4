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

#include "fabrica/arm.hpp"
#include "fabrica/errors.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

Mat fd_jacobian(const TaskMap& m, const Vec& q, double h = 1e-6) {
  Mat J(m.out_dim, m.in_dim);
  for (int j = 0; j < m.in_dim; ++j) {
    const Vec e = h * Vec::Unit(m.in_dim, j);
    J.col(j) = (m.phi(q + e) - m.phi(q - e)) / (2 * h);
  }
  return J;
}

Vec fd_curvature(const TaskMap& m, const Vec& q, const Vec& qd, double h = 1e-6) {
  return (m.jacobian(q + h * qd) - m.jacobian(q - h * qd)) * qd / (2 * h);
}

}  // namespace

TEST_CASE("forward kinematics of a straight arm") {
  const PlanarArm arm = PlanarArm::standard();
  const Vec p = arm_ee_map(arm).phi(Vec::Zero(3));
  CHECK(p(0) == doctest::Approx(arm.reach()));
  CHECK(p(1) == doctest::Approx(0.0));
  Vec q = Vec::Zero(3);
  q(0) = M_PI / 2;
  const Vec up = arm_ee_map(arm).phi(q);
  CHECK(up(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(up(1) == doctest::Approx(arm.reach()));
  CHECK(arm_point_map(arm, 1, 0.5).phi(Vec::Zero(3))(0) == doctest::Approx(0.6));
}

TEST_CASE("arm maps have consistent derivatives") {
  const PlanarArm arm = PlanarArm::standard();
  const ArmMaps maps = arm_forward_maps(arm, 0.9);
  std::vector<TaskMap> all = maps.body_points;
  all.insert(all.end(), maps.wall_distances.begin(), maps.wall_distances.end());
  all.insert(all.end(), maps.joint_limits.begin(), maps.joint_limits.end());
  all.push_back(point_distance_map(maps.ee, Vec::Constant(2, 2.0)));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int i = 0; i < 100; ++i) {
    Vec q(3), qd(3);
    for (int j = 0; j < 3; ++j) {
      q(j) = u(rng);
      qd(j) = u(rng);
    }
    for (const TaskMap& m : all) {
      CHECK(oracle::max_abs(m.jacobian(q) - fd_jacobian(m, q)) < 1e-6);
      CHECK(oracle::max_abs(m.curvature(q, qd) - fd_curvature(m, q, qd)) < 1e-5);
    }
  }
}

TEST_CASE("distance maps") {
  const PlanarArm arm = PlanarArm::standard();
  const TaskMap ee = arm_ee_map(arm);
  Vec q(3);
  q << 0.3, -0.4, 0.5;
  const Vec p = ee.phi(q);
  CHECK(wall_distance_map(ee, 0.9).phi(q)(0) == doctest::Approx(0.9 - p(0)));
  const Vec c = Vec::Constant(2, 2.0);
  const TaskMap d = point_distance_map(ee, c);
  CHECK(d.phi(q)(0) == doctest::Approx((p - c).norm()));
  // Gradient in task space is the unit vector from the obstacle to the point.
  const Mat Jee = ee.jacobian(q);
  const Vec n = (p - c).normalized();
  CHECK(oracle::max_abs(d.jacobian(q) - n.transpose() * Jee) < 1e-12);

  const TaskMap lo = joint_limit_map(arm, 1, false);
  const TaskMap hi = joint_limit_map(arm, 1, true);
  CHECK(lo.phi(q)(0) == doctest::Approx(-0.4 + 2.8));
  CHECK(hi.phi(q)(0) == doctest::Approx(2.8 + 0.4));
}

TEST_CASE("arm validation") {
  PlanarArm arm = PlanarArm::standard();
  arm.link_lengths[0] = 0.0;
  CHECK_THROWS_AS(arm.validate(), ConfigError);
  CHECK_THROWS_AS(arm_point_map(PlanarArm::standard(), 5, 1.0), StructuralError);
}

TEST_CASE("wall schedule") {
  const WallSchedule w;
  const auto d = w.distances();
  REQUIRE(d.size() == 17);
  CHECK(d.front() == doctest::Approx(0.3));
  CHECK(d.back() == doctest::Approx(-0.1));
}
