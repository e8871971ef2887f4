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

#include <random>

#include "fabrica/core.hpp"
#include "oracles.hpp"

using namespace fabrica;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Spec spec_from_policy(const Mat& M, const Vec& pi) { return {M, -M * pi}; }

}  // namespace

TEST_CASE("spec_sum: zero weight annihilates a component") {
  const Mat I = Mat::Identity(2, 2);
  const Spec s = spec_sum({{Weight(1.0), {I, v2(1, 2)}}, {Weight(0.0), {5 * I, v2(9, 9)}}});
  CHECK(oracle::max_abs(s.M - I) == 0.0);
  CHECK(oracle::max_abs(s.f - v2(1, 2)) == 0.0);
}

TEST_CASE("spec_sum: weighted arithmetic") {
  const Mat I = Mat::Identity(2, 2);
  const Spec s = spec_sum({{Weight(2.0), {I, v2(1, 0)}}, {Weight(3.0), {I, v2(0, 1)}}});
  CHECK(oracle::max_abs(s.M - 5 * I) == 0.0);
  CHECK(oracle::max_abs(s.f - v2(2, 3)) == 0.0);
}

TEST_CASE("spec_sum: matches an elementwise oracle on random 3-D specs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Spec a{oracle::random_mat(rng, 3, 3), oracle::random_vec(rng, 3)};
    const Spec b{oracle::random_mat(rng, 3, 3), oracle::random_vec(rng, 3)};
    const double wa = w(rng), wb = w(rng);
    const Spec s = spec_sum({{Weight(wa), a}, {Weight(wb), b}});
    for (int i = 0; i < 3; ++i) {
      CHECK(s.f(i) == doctest::Approx(wa * a.f(i) + wb * b.f(i)).epsilon(1e-15));
      for (int j = 0; j < 3; ++j) {
        CHECK(s.M(i, j) == doctest::Approx(wa * a.M(i, j) + wb * b.M(i, j)).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("spec_sum: errors") {
  const Spec a{Mat::Identity(2, 2), Vec::Zero(2)};
  const Spec b{Mat::Identity(3, 3), Vec::Zero(3)};
  CHECK_THROWS_AS(spec_sum({{Weight(1.0), a}, {Weight(1.0), b}}), StructuralError);
  CHECK_THROWS_AS(spec_sum({{Weight(0.0), a}, {Weight(0.0), a}}), DegenerateError);
  CHECK_THROWS_AS(Weight(-1.0), PreconditionError);
}

TEST_CASE("resolve: identity and diagonal metrics") {
  const Vec a = resolve({Mat::Identity(2, 2), v2(2, -4)}, 0.0);
  CHECK(oracle::max_abs(a - v2(-2, 4)) == 0.0);
  Mat D = Mat::Zero(2, 2);
  D.diagonal() << 2, 4;
  const Vec b = resolve({D, v2(2, 4)}, 0.0);
  CHECK(oracle::max_abs(b - v2(-1, -1)) < 1e-15);
}

TEST_CASE("resolve: fixed 4x4 SPD against frozen reference") {
  Mat M(4, 4);
  M << 4, 1, 0.5, 0.2, 1, 3, 0.3, 0.1, 0.5, 0.3, 2, 0.4, 0.2, 0.1, 0.4, 1.5;
  Vec f(4);
  f << 1, -2, 0.5, 3;
  Vec expected(4);
  expected << -0.37543576920131455, 0.8473317772724095, 0.12469575235323697, -2.0396828832188487;
  CHECK(oracle::max_abs(resolve({M, f}, 0.0) - expected) < 1e-14);
}

TEST_CASE("resolve: random SPD systems agree with Gaussian elimination") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat M = oracle::random_spd(rng, 4);
    const Vec f = oracle::random_vec(rng, 4);
    const Vec ref = -oracle::gauss_solve(M, f);
    CHECK(oracle::max_abs(resolve({M, f}, 0.0) - ref) < 1e-9);
  }
}

TEST_CASE("resolve: singular metric is reported") {
  Mat M = Mat::Zero(2, 2);
  M(0, 0) = 1.0;
  CHECK_THROWS_AS(resolve({M, v2(1, 1)}, 0.0), SingularMetricError);
  CHECK_THROWS_AS(resolve({Mat::Identity(2, 2), Vec::Zero(3)}), StructuralError);
}

TEST_CASE("resolve: asymmetric round-off is symmetrized") {
  Mat M = Mat::Identity(2, 2);
  M(0, 1) = 1e-13;
  const Vec a = resolve({M, v2(1, 1)}, 0.0);
  Mat S = Mat::Identity(2, 2);
  S(0, 1) = S(1, 0) = 5e-14;
  CHECK(oracle::max_abs(a + oracle::gauss_solve(S, v2(1, 1))) < 1e-15);
}

TEST_CASE("classical_average: single component is its own policy") {
  std::mt19937_64 rng(2);
  const Mat M = oracle::random_spd(rng, 3);
  const Vec pi = oracle::random_vec(rng, 3);
  CHECK(oracle::max_abs(classical_average({spec_from_policy(M, pi)}, 0.0) - pi) < 1e-12);
}

TEST_CASE("classical_average: equal metrics give the arithmetic mean") {
  const Mat I = Mat::Identity(2, 2);
  const Vec a = classical_average({spec_from_policy(I, v2(1, 0)), spec_from_policy(I, v2(0, 1))}, 0.0);
  CHECK(oracle::max_abs(a - v2(0.5, 0.5)) < 1e-15);
}

TEST_CASE("classical_average: fixed three-component case against frozen reference") {
  Mat M1(2, 2), M2(2, 2), M3(2, 2);
  M1 << 2, 0.5, 0.5, 1;
  M2 << 1, 0, 0, 3;
  M3 << 1.5, -0.2, -0.2, 0.7;
  const Vec a = classical_average(
      {spec_from_policy(M1, v2(1, 0)), spec_from_policy(M2, v2(0, 1)), spec_from_policy(M3, v2(-1, 2))},
      0.0);
  CHECK(oracle::max_abs(a - v2(-0.05033238366571696, 1.088319088319088)) < 1e-14);
}

TEST_CASE("classical_average: random SPD components against the direct formula") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Spec> specs;
    Mat M_sum = Mat::Zero(3, 3);
    Vec weighted = Vec::Zero(3);
    for (int c = 0; c < 3; ++c) {
      const Mat M = oracle::random_spd(rng, 3);
      const Vec f = oracle::random_vec(rng, 3);
      specs.push_back({M, f});
      M_sum += M;
      weighted += M * (-oracle::gauss_solve(M, f));
    }
    CHECK(oracle::max_abs(classical_average(specs, 0.0) - oracle::gauss_solve(M_sum, weighted)) <
          1e-9);
  }
}
