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

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fabrica/errors.hpp"

namespace fabrica {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kMetricRegularization = 1e-9;
inline constexpr double kConditionLimit = 1e12;
inline constexpr double kVelocityFloor = 1e-8;

struct State {
  Vec q;
  Vec qd;

  State() = default;
  State(Vec q_in, Vec qd_in);

  int dim() const { return static_cast<int>(q.size()); }
  // Throws StructuralError or DomainError when the invariants fail.
  void validate() const;
};

// The system M * qdd + f = 0.
struct Spec {
  Mat M;
  Vec f;

  int dim() const { return static_cast<int>(f.size()); }
  void validate() const;
};

class Weight {
 public:
  explicit Weight(double value = 1.0);
  double value() const { return value_; }

 private:
  double value_;
};

// Energy spec (M, xi), force f and the potential terms of one component,
// all expressed in a common space.
struct FabricComponent {
  Spec energy;
  Vec force;
  Vec potential_gradient;
  double energy_value = 0.0;
  double potential_value = 0.0;

  static FabricComponent zero(int dim);
  int dim() const { return static_cast<int>(force.size()); }
  void add_scaled(double w, const FabricComponent& other);
};

Mat symmetrized(const Mat& M);
bool is_symmetric(const Mat& M, double rel_tol = 1e-10);

Spec spec_sum(const std::vector<std::pair<Weight, Spec>>& components);

// qdd = -(M + eps I)^-1 f
Vec resolve(const Spec& spec, double eps_M = kMetricRegularization);

// Solves (M + eps I) x = b with the conditioning check used by resolve.
Vec solve_metric(const Mat& M, const Vec& b, double eps_M = kMetricRegularization);
Mat inverse_metric(const Mat& M, double eps_M = kMetricRegularization);

// (sum M_i)^-1 sum M_i pi_i with pi_i = resolve(spec_i).
Vec classical_average(const std::vector<Spec>& components,
                      double eps_M = kMetricRegularization);

}  // namespace fabrica
