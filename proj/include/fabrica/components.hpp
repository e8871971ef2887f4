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
#include <vector>

#include "fabrica/core.hpp"
#include "fabrica/energize.hpp"
#include "fabrica/lagrangian.hpp"
#include "fabrica/transform.hpp"

namespace fabrica {

// Directional switch: 1 when moving toward the boundary. Zero velocity is
// treated as not approaching.
inline double approach_gate(double xd) { return xd < 0.0 ? 1.0 : 0.0; }

struct PointAttractionParams {
  double m_upper = 2.0;
  double m_lower = 0.2;
  double alpha_m = 0.75;
  double k = 0.5;
  double alpha_psi = 10.0;
  // Gain of the HD2 attractor geometry -c |xd|^2 grad(psi1)/k. Zero gives straight lines.
  double geometry_gain = 0.0;

  void validate() const;
};

struct ComponentBundle {
  EnergyFunction energy;
  GeometryPolicy geometry;
  Potential potential;
};

// Radial attraction on x = q - q_d. The potential gradient is
// G(x) k tanh(alpha_psi |x|) x_hat. The geometry is straight-line (zero) and
// the attraction enters through the potential.
ComponentBundle point_attraction(const PointAttractionParams& p, int dim = 2);

// Helpers exposed for tests.
double attraction_metric_scale(const PointAttractionParams& p, double r);
Vec attraction_base_gradient(const PointAttractionParams& p, const Vec& x);  // d psi_1
double attraction_base_potential(const PointAttractionParams& p, double r);  // psi_1

struct BarrierParams {
  double k_b = 0.5;
  double alpha_b = 0.5;
  bool velocity_gated = false;
  double radius = 1.0;
  Vec center = Vec::Zero(2);

  void validate() const;
};

inline constexpr double kBarrierMinDistance = 1e-4;
inline constexpr double kBarrierForceCeiling = 1e8;

// x = |q - q_o| / r - 1
TaskMap circle_distance_map(const Vec& center, double radius);

struct CircularRepulsion {
  TaskMap map;
  EnergyFunction energy;    // G_b(x) xdot^2, gated when velocity_gated
  GeometryPolicy geometry;  // -s(xdot) xdot^2 d psi_1b
  Potential potential;      // gradient G_b(x) d psi_1b with position-only G_b
};

CircularRepulsion circular_repulsion(const BarrierParams& p);

struct JointAttractionParams {
  double m = 0.1;
  double k = 1.0;
  double alpha = 1.0;
};

struct DistanceRepulsionParams {
  double k = 0.5;  // energy scale of (k / 2x) s(xdot) xdot^2
  double k_b = 1e-3;
  double k_r = 0.05;
  double alpha = 50.0;
  double x_o = 0.02;
  // The geometry barrier term is k_b / x, the potential's k_b_potential / x.
  double k_b_potential = 1e-3;
};

struct EEAttractionParams {
  double m_upper = 2.0;
  double m_lower = 0.5;
  double alpha_m = 10.0;
  double k = 4.0;
  double alpha = 10.0;
};

// psi = k sum log cosh(alpha (x_d - x)); energy m/2 |xd|^2; pi = -|xd|^2 d psi.
ComponentBundle joint_attraction(const JointAttractionParams& p, const Vec& x_d);

// 1-D distance space. The geometry uses geometry_params and the potential
// uses potential_params so the two can be weighted independently.
ComponentBundle distance_repulsion(const DistanceRepulsionParams& geometry_params,
                                   const DistanceRepulsionParams& potential_params);

// Energy c(x) |xd|^2 with c = 1/2 (m_u - m_l)(tanh(-alpha_m |x_d - x|) + 1) + m_l,
// psi = k log cosh(alpha |x_d - x|), pi = -|xd|^2 d psi.
ComponentBundle ee_attraction(const EEAttractionParams& geometry_params,
                              const EEAttractionParams& potential_params, const Vec& x_d);

// pi = L_e(x, xd) sigma(xd_hat) base(x, xd_hat), HD2 when base is HD0 and L_e HD2.
GeometryPolicy hd2_from_hd0(std::function<Vec(const Vec& x, const Vec& xd_hat)> base,
                            const EnergyFunction& scaler,
                            std::function<double(const Vec& x, const Vec& xd_hat)> gate,
                            const std::vector<State>& hd0_samples);

struct SymmetryReport {
  double max_asymmetry = 0.0;
  int samples = 0;
};

// Max entry of dF - dF^T by central differences.
SymmetryReport potential_symmetry_check(const std::function<Vec(const Vec&)>& field,
                                        const std::vector<Vec>& samples, double h = 1e-5);

// Max |analytic - central difference| of a potential's gradient.
double potential_gradient_error(const Potential& p, const std::vector<Vec>& samples,
                                double h = 1e-6);

}  // namespace fabrica
