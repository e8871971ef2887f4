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

namespace fabrica {

// A Lagrangian in velocity-dependent form. eval receives a separate gate
// velocity so directional switches stay on one branch while the energy is
// differentiated.
struct EnergyFunction {
  using Eval = std::function<double(const Vec& x, const Vec& xd, const Vec& gate_xd)>;
  using Analytic = std::function<Spec(const Vec& x, const Vec& xd)>;

  std::string name;
  int dim = 0;
  Eval eval;
  Analytic analytic;  // optional closed-form (M, xi)
  int homogeneity_degree = 2;

  double operator()(const Vec& x, const Vec& xd) const { return eval(x, xd, xd); }
  bool has_analytic() const { return static_cast<bool>(analytic); }
};

struct DiffStrategy {
  enum class Mode { kAnalytic, kCentralDifference };
  Mode mode = Mode::kAnalytic;
  double h_first = 1e-5;
  double h_second = 1e-4;

  static DiffStrategy analytic() { return {}; }
  static DiffStrategy finite_difference(double h_first = 1e-5, double h_second = 1e-4);
};

// G(q, qd), symmetric and HD0 in qd.
using MetricFieldG = std::function<Mat(const Vec& q, const Vec& qd)>;

// (M, xi) with M = d2L/dxd2 and xi = d2L/dxd dx * xd - dL/dx.
Spec euler_lagrange(const EnergyFunction& L, const DiffStrategy& strategy, const State& state);

// H = dL/dxd . xd - L
double hamiltonian(const EnergyFunction& L, const DiffStrategy& strategy, const State& state);

// dH/dt = qd . (M qdd + xi)
double hamiltonian_rate(const Spec& spec, const State& state, const Vec& accel);

// Equations of motion of L = 1/2 qd^T G qd in tensor form: returns (G + Xi, Upsilon qd qd).
Spec explicit_finsler_eom(const MetricFieldG& G, const State& state, double h = 1e-4);

struct FinslerReport {
  double nonnegativity = 0.0;  // max(-L) over samples, and L at zero velocity
  double homogeneity = 0.0;    // max relative HD2 violation
  double psd = 0.0;            // max(-lambda_min(M)) over samples
  int samples = 0;
  bool passed(double tol = 1e-8) const;
};

FinslerReport finsler_checks(const EnergyFunction& L, const std::vector<State>& samples,
                             const DiffStrategy& strategy = DiffStrategy::finite_difference());

// Max relative HD2 violation of L over samples and scales.
double energy_homogeneity_violation(const EnergyFunction& L, const std::vector<State>& samples,
                                    const std::vector<double>& scales = {0.5, 2.0, 5.0});

// Common energies.
EnergyFunction euclidean_energy(int dim, double mass = 1.0);
// L = g(x) |xd|^2 with g, grad g supplied.
EnergyFunction isotropic_energy(std::string name, int dim, std::function<double(const Vec&)> g,
                                std::function<Vec(const Vec&)> grad_g);

}  // namespace fabrica
