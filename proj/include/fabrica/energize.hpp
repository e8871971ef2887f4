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
#include <string>
#include <vector>

#include "fabrica/core.hpp"
#include "fabrica/lagrangian.hpp"

namespace fabrica {

struct GeometryPolicy {
  using Eval = std::function<Vec(const Vec& q, const Vec& qd)>;

  std::string name;
  Eval eval;
  bool claimed_hd2 = true;

  Vec operator()(const Vec& q, const Vec& qd) const { return eval(q, qd); }
};

GeometryPolicy zero_geometry(int dim);

// alpha = -(qd^T M qd)^-1 qd^T (M pi + xi), zero below the velocity floor.
double energization_coefficient(const Spec& energy_spec, const Vec& pi, const Vec& qd,
                                double eps_v = kVelocityFloor);

// Symmetric square root and inverse square root with an eigenvalue floor.
Mat spd_sqrt(const Mat& M, double floor = 1e-12);
Mat spd_inv_sqrt(const Mat& M, double floor = 1e-12);

// P_e = M^(1/2) (I - v v^T / |v|^2) M^(-1/2), v = M^(1/2) qd.
Mat energy_projector(const Mat& M, const Vec& qd, double eps_v = kVelocityFloor);

// f_f = -P_e (M pi + xi); zero below the velocity floor.
Vec bending_force(const Spec& energy_spec, const Vec& pi, const Vec& qd,
                  double eps_v = kVelocityFloor);

struct EnergizedFabric {
  struct Evaluation {
    Spec energy;  // (M, xi)
    Vec pi;
    double alpha = 0.0;
    Vec accel;  // pi + alpha qd
  };

  EnergyFunction energy;
  GeometryPolicy geometry;
  double eps_v = kVelocityFloor;
  DiffStrategy strategy = DiffStrategy::analytic();

  Evaluation evaluate(const State& state) const;
  Vec accel(const State& state) const { return evaluate(state).accel; }
  Vec bending(const State& state) const;
};

EnergizedFabric energize(EnergyFunction energy, GeometryPolicy geometry,
                         double eps_v = kVelocityFloor);

// Max relative HD2 violation of a policy over samples and scales.
double geometry_homogeneity_violation(const GeometryPolicy& pi, const std::vector<State>& samples,
                                      const std::vector<double>& scales = {0.5, 2.0, 5.0});

}  // namespace fabrica
