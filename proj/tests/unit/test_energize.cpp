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

#include "fabrica/energize.hpp"
#include "fabrica/errors.hpp"
#include "fabrica/integrator.hpp"
#include "fabrica/particles.hpp"
#include "fabrica/transform.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

GeometryPolicy constant_geometry(const Vec& pi) {
  GeometryPolicy g;
  g.name = "constant";
  g.eval = [pi](const Vec&, const Vec&) { return pi; };
  return g;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("energization coefficient of a constant policy") {
  const Spec s{Mat::Identity(2, 2), Vec::Zero(2)};
  CHECK(energization_coefficient(s, v2(2, 3), v2(1, 0)) == doctest::Approx(-2.0).epsilon(1e-15));
  // pi parallel to qd is removed entirely.
  for (double c : {-3.0, 0.5, 7.0}) {
    const Vec qd = v2(0.3, -1.2);
    CHECK(energization_coefficient(s, c * qd, qd) == doctest::Approx(-c).epsilon(1e-14));
  }
  CHECK(energization_coefficient(s, v2(1, 1), Vec::Zero(2)) == 0.0);
}

TEST_CASE("energized policy keeps the energy rate at zero") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Mat M = oracle::random_spd(rng, 3);
    const Vec xi = oracle::random_vec(rng, 3);
    const Vec qd = oracle::random_vec(rng, 3);
    const Vec pi = oracle::random_vec(rng, 3, 5.0);
    const Spec s{M, xi};
    const double a = energization_coefficient(s, pi, qd);
    const Vec qdd = pi + a * qd;
    const double rate = qd.dot(M * qdd + xi);
    CHECK(std::abs(rate) <= 1e-9 * (1.0 + qd.squaredNorm() * pi.norm()));
  }
}

TEST_CASE("energy projector") {
  const Mat P = energy_projector(Mat::Identity(2, 2), v2(1, 0));
  Mat expect(2, 2);
  expect << 0, 0, 0, 1;
  CHECK(oracle::max_abs(P - expect) < 1e-14);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Mat M = oracle::random_spd(rng, 4);
    const Vec qd = oracle::random_vec(rng, 4);
    // M R_p with R_p = M^-1 - qd qd^T / (qd^T M qd)
    const Mat Rp = oracle::gauss_inverse(M) - qd * qd.transpose() / qd.dot(M * qd);
    CHECK(oracle::max_abs(energy_projector(M, qd) - M * Rp) < 1e-10);
  }
  CHECK_THROWS_AS(energy_projector(Mat::Identity(2, 2), Vec::Zero(2)), DegenerateError);
}

TEST_CASE("bending force removes the component orthogonal to the velocity") {
  const Spec s{Mat::Identity(2, 2), Vec::Zero(2)};
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const Vec qd = oracle::random_vec(rng, 2);
    const Vec pi = oracle::random_vec(rng, 2);
    const Vec qh = qd.normalized();
    const Vec expect = -(pi - qh * qh.dot(pi));
    CHECK(oracle::max_abs(bending_force(s, pi, qd) - expect) < 1e-12);
    CHECK(std::abs(qd.dot(bending_force(s, pi, qd))) < 1e-12);
  }
}

TEST_CASE("energized fabric evaluation") {
  const EnergizedFabric f = energize(euclidean_energy(2), constant_geometry(v2(2, 3)));
  const auto e = f.evaluate(State(Vec::Zero(2), v2(1, 0)));
  CHECK(e.alpha == doctest::Approx(-2.0));
  CHECK(oracle::max_abs(e.accel - v2(0, 3)) < 1e-14);

  // A zero geometry energizes to the energy's own geodesic.
  const auto g = energize(euclidean_energy(2), zero_geometry(2)).evaluate(State(v2(1, 2), v2(-1, 4)));
  CHECK(oracle::max_abs(g.accel) < 1e-14);
}

TEST_CASE("energized bent particle tree conserves its energy") {
  const ParticleWorld world = ParticleWorld::standard();
  const TransformTree tree = particle_tree(world, ParticleParams{}, ParticleVariant::kBentFinsler, false);
  const EnergizedFabric f = root_fabric(tree);
  const EnergyFunction L = tree_energy(tree);
  const Integrator rk4{Scheme::kRK4, 1e-3};
  State s(world.starts.front(), v2(-0.5, 0.1));
  const double H0 = hamiltonian(L, DiffStrategy::analytic(), s);
  double drift = 0.0;
  for (int i = 0; i < 5000; ++i) {
    s = step([&](const State& x) { return f.accel(x); }, s, rk4);
    drift = std::max(drift, std::abs(hamiltonian(L, DiffStrategy::analytic(), s) - H0) / H0);
  }
  CHECK(drift <= 1e-5);
}
