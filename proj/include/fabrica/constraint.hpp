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

#include <functional>
#include <optional>
#include <string>

#include "fabrica/core.hpp"
#include "fabrica/transform.hpp"

namespace fabrica {

// C(q) = 0 with Jacobian J (m x d) and curvature Jdot qd.
struct EqualityConstraint {
  std::string name;
  int dim = 0;
  int rows = 0;
  std::function<Vec(const Vec&)> C;
  std::function<Mat(const Vec&)> jacobian;
  std::function<Vec(const Vec&, const Vec&)> curvature;

  static EqualityConstraint from_map(const TaskMap& map);
  static EqualityConstraint none(int dim);
};

struct Projectors {
  Mat perp;  // J^T (J M^-1 J^T)^-1 J M^-1
  Mat par;   // I - perp
};

Projectors constraint_projectors(const Mat& M, const Mat& Jc,
                                 double eps_M = kMetricRegularization);

// Terms of M qdd + xi + f_f = -dpsi - B qd.
struct ConstrainedTerms {
  Mat M;
  Vec xi;
  Vec f_f;
  Vec dpsi;
  Mat B;
};

struct Baumgarte {
  bool enabled = false;
  double omega = 10.0;
};

struct ConstrainOptions {
  double feasibility_tol = 1e-6;
  Baumgarte baumgarte;
  double eps_M = kMetricRegularization;
};

// Solves M qdd + P_par (xi + f_f) + J^T (J M^-1 J^T)^-1 Jdot qd = -P_par (dpsi + B qd).
Vec constrain_fabric(const ConstrainedTerms& terms, const EqualityConstraint& constraint,
                     const State& state, const ConstrainOptions& options = {});

// lambda = (J M^-1 J^T)^-1 (-J M^-1 f + Jdot qd)
Vec lagrange_multipliers(const Mat& M, const Vec& f_total, const EqualityConstraint& constraint,
                         const State& state, double eps_M = kMetricRegularization);

// qdd = -M^-1 (f + J^T lambda)
Vec multiplier_accel(const Mat& M, const Vec& f_total, const EqualityConstraint& constraint,
                     const State& state, const ConstrainOptions& options = {});

// P_perp (M J+ Jdot qd - xi) + P_par f_f, the bending term of the constrained fabric.
Vec constrained_bending(const ConstrainedTerms& terms, const EqualityConstraint& constraint,
                        const State& state, double eps_M = kMetricRegularization);

// Newton projection of q onto C(q) = 0 and of qd onto the tangent space.
State project_feasible(const EqualityConstraint& constraint, const State& state,
                       double tol = 1e-12, int max_iter = 50);

struct PenaltySolverConfig {
  double dt = 0.04;
  // Penalty weight relative to the fabric's quadratic stiffness tr(M)/(d dt^4).
  double lambda = 1e6;
  int gn_iterations = 4;

  void validate() const;
};

struct PenaltyFabricEval {
  Mat M;
  Vec accel_desired;
};

using PenaltyFabric = std::function<PenaltyFabricEval(const State&)>;

struct PenaltyStepResult {
  Vec q_next;
  double cost = 0.0;
  double gradient_norm = 0.0;
  double constraint_value = 0.0;
};

// One step of the discretized penalty program, Gauss-Newton on q_{k+1}. The
// fabric is evaluated at (q_k, (q_k - q_{k-1}) / dt).
PenaltyStepResult penalty_step(const PenaltyFabric& fabric, const EqualityConstraint& constraint,
                               const Vec& q_prev, const Vec& q_k,
                               const PenaltySolverConfig& config);

}  // namespace fabrica
