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

#include "fabrica/energize.hpp"

#include <algorithm>
#include <cmath>

namespace fabrica {

GeometryPolicy zero_geometry(int dim) {
  return GeometryPolicy{"zero", [dim](const Vec&, const Vec&) { return Vec::Zero(dim); }, true};
}

double energization_coefficient(const Spec& energy_spec, const Vec& pi, const Vec& qd,
                                double eps_v) {
  if (qd.norm() <= eps_v) return 0.0;
  const double denom = qd.dot(energy_spec.M * qd);
  if (!(denom > 0.0)) return 0.0;
  return -qd.dot(energy_spec.M * pi + energy_spec.f) / denom;
}

namespace {

Mat spd_power(const Mat& M, double floor, double power) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(M));
  if (eig.info() != Eigen::Success) throw SingularMetricError("eigendecomposition failed");
  const Vec lam = eig.eigenvalues().cwiseMax(floor);
  const Vec p = lam.array().pow(power).matrix();
  return eig.eigenvectors() * p.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Mat spd_sqrt(const Mat& M, double floor) { return spd_power(M, floor, 0.5); }
Mat spd_inv_sqrt(const Mat& M, double floor) { return spd_power(M, floor, -0.5); }

Mat energy_projector(const Mat& M, const Vec& qd, double eps_v) {
  if (qd.norm() <= eps_v) throw DegenerateError("velocity below floor in energy_projector");
  const int d = static_cast<int>(qd.size());
  const Mat S = spd_sqrt(M);
  const Mat Si = spd_inv_sqrt(M);
  const Vec v = S * qd;
  const Vec vh = v / v.norm();
  return S * (Mat::Identity(d, d) - vh * vh.transpose()) * Si;
}

Vec bending_force(const Spec& energy_spec, const Vec& pi, const Vec& qd, double eps_v) {
  if (qd.norm() <= eps_v) return Vec::Zero(qd.size());
  // P_e = I - M qd qd^T / (qd^T M qd), identical to the square-root form.
  const Vec r = energy_spec.M * pi + energy_spec.f;
  const Vec p = energy_spec.M * qd;
  const double denom = qd.dot(p);
  if (!(denom > 0.0)) return Vec::Zero(qd.size());
  return -(r - p * (qd.dot(r) / denom));
}

EnergizedFabric::Evaluation EnergizedFabric::evaluate(const State& state) const {
  Evaluation ev;
  ev.energy = euler_lagrange(energy, strategy, state);
  ev.pi = geometry(state.q, state.qd);
  if (!ev.pi.allFinite()) throw DomainError("geometry '" + geometry.name + "' is non-finite");
  ev.alpha = energization_coefficient(ev.energy, ev.pi, state.qd, eps_v);
  ev.accel = ev.pi + ev.alpha * state.qd;
  return ev;
}

Vec EnergizedFabric::bending(const State& state) const {
  const Evaluation ev = evaluate(state);
  return bending_force(ev.energy, ev.pi, state.qd, eps_v);
}

EnergizedFabric energize(EnergyFunction energy, GeometryPolicy geometry, double eps_v) {
  if (!(eps_v > 0.0)) throw PreconditionError("velocity floor must be positive");
  EnergizedFabric f;
  f.energy = std::move(energy);
  f.geometry = std::move(geometry);
  f.eps_v = eps_v;
  f.strategy = f.energy.has_analytic() ? DiffStrategy::analytic() : DiffStrategy::finite_difference();
  return f;
}

double geometry_homogeneity_violation(const GeometryPolicy& pi, const std::vector<State>& samples,
                                      const std::vector<double>& scales) {
  double worst = 0.0;
  for (const auto& s : samples) {
    const Vec p0 = pi(s.q, s.qd);
    for (double a : scales) {
      const Vec pa = pi(s.q, a * s.qd);
      const Vec expect = a * a * p0;
      const double scale = std::max(expect.norm(), 1e-12);
      worst = std::max(worst, (pa - expect).norm() / scale);
    }
  }
  return worst;
}

}  // namespace fabrica
