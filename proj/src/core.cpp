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

#include "fabrica/core.hpp"

#include <cmath>
#include <string>

namespace fabrica {

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string(what) + " has non-finite entries");
}

}  // namespace

State::State(Vec q_in, Vec qd_in) : q(std::move(q_in)), qd(std::move(qd_in)) {}

void State::validate() const {
  if (q.size() < 1 || q.size() != qd.size()) {
    throw StructuralError("state dimensions differ: q " + std::to_string(q.size()) +
                          ", qd " + std::to_string(qd.size()));
  }
  require_finite(q, "state q");
  require_finite(qd, "state qd");
}

void Spec::validate() const {
  if (M.rows() != M.cols() || M.rows() != f.size()) {
    throw StructuralError("spec shape mismatch: M " + std::to_string(M.rows()) + "x" +
                          std::to_string(M.cols()) + ", f " + std::to_string(f.size()));
  }
}

Weight::Weight(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw PreconditionError("weight must be a finite nonnegative scalar");
  }
}

FabricComponent FabricComponent::zero(int dim) {
  FabricComponent c;
  c.energy.M = Mat::Zero(dim, dim);
  c.energy.f = Vec::Zero(dim);
  c.force = Vec::Zero(dim);
  c.potential_gradient = Vec::Zero(dim);
  return c;
}

void FabricComponent::add_scaled(double w, const FabricComponent& other) {
  if (other.dim() != dim()) {
    throw StructuralError("component dimension mismatch: " + std::to_string(dim()) + " vs " +
                          std::to_string(other.dim()));
  }
  energy.M += w * other.energy.M;
  energy.f += w * other.energy.f;
  force += w * other.force;
  potential_gradient += w * other.potential_gradient;
  energy_value += w * other.energy_value;
  potential_value += w * other.potential_value;
}

Mat symmetrized(const Mat& M) { return 0.5 * (M + M.transpose()); }

bool is_symmetric(const Mat& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Spec spec_sum(const std::vector<std::pair<Weight, Spec>>& components) {
  if (components.empty()) throw DegenerateError("spec_sum of an empty list");
  const int d = components.front().second.dim();
  Spec out{Mat::Zero(d, d), Vec::Zero(d)};
  bool any_positive = false;
  for (const auto& [w, s] : components) {
    s.validate();
    if (s.dim() != d) {
      throw StructuralError("spec_sum dimension mismatch: " + std::to_string(s.dim()) +
                            " vs " + std::to_string(d));
    }
    if (w.value() > 0.0) any_positive = true;
    out.M += w.value() * s.M;
    out.f += w.value() * s.f;
  }
  if (!any_positive) throw DegenerateError("spec_sum with all weights zero");
  return out;
}

Vec solve_metric(const Mat& M, const Vec& b, double eps_M) {
  if (eps_M < 0.0) throw PreconditionError("eps_M must be nonnegative");
  if (M.rows() != M.cols() || M.rows() != b.size()) {
    throw StructuralError("metric solve shape mismatch");
  }
  Mat A = symmetrized(M);
  A.diagonal().array() += eps_M;
  Eigen::LDLT<Mat> ldlt(A);
  const Vec pivots = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() * kConditionLimit >= 1.0) ||
      !(pivots.minCoeff() * kConditionLimit >= pivots.maxCoeff())) {
    throw SingularMetricError("metric singular beyond condition limit (rcond " +
                              std::to_string(ldlt.rcond()) + ")");
  }
  Vec x = ldlt.solve(b);
  if (!x.allFinite()) throw SingularMetricError("metric solve produced non-finite values");
  return x;
}

Mat inverse_metric(const Mat& M, double eps_M) {
  const int d = static_cast<int>(M.rows());
  Mat out(d, d);
  for (int i = 0; i < d; ++i) out.col(i) = solve_metric(M, Vec::Unit(d, i), eps_M);
  return symmetrized(out);
}

Vec resolve(const Spec& spec, double eps_M) {
  spec.validate();
  return -solve_metric(spec.M, spec.f, eps_M);
}

Vec classical_average(const std::vector<Spec>& components, double eps_M) {
  if (components.empty()) throw DegenerateError("classical_average of an empty list");
  const int d = components.front().dim();
  Mat M_sum = Mat::Zero(d, d);
  Vec weighted = Vec::Zero(d);
  for (const auto& s : components) {
    s.validate();
    if (s.dim() != d) throw StructuralError("classical_average dimension mismatch");
    const Vec pi = resolve(s, eps_M);
    M_sum += s.M;
    weighted += s.M * pi;
  }
  return solve_metric(M_sum, weighted, eps_M);
}

}  // namespace fabrica
