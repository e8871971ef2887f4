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

#include "fabrica/constraint.hpp"

#include <cmath>

namespace fabrica {

EqualityConstraint EqualityConstraint::from_map(const TaskMap& map) {
  EqualityConstraint c;
  c.name = map.name;
  c.dim = map.in_dim;
  c.rows = map.out_dim;
  c.C = map.phi;
  c.jacobian = map.jacobian;
  c.curvature = map.curvature;
  return c;
}

EqualityConstraint EqualityConstraint::none(int dim) {
  EqualityConstraint c;
  c.name = "none";
  c.dim = dim;
  c.rows = 0;
  c.C = [](const Vec&) { return Vec(0); };
  c.jacobian = [dim](const Vec&) { return Mat(0, dim); };
  c.curvature = [](const Vec&, const Vec&) { return Vec(0); };
  return c;
}

namespace {

void check_rank(const Mat& Jc) {
  if (Jc.rows() == 0) return;
  if (Jc.rows() >= Jc.cols()) {
    throw StructuralError("constraint has " + std::to_string(Jc.rows()) +
                          " rows for dimension " + std::to_string(Jc.cols()));
  }
  Eigen::JacobiSVD<Mat> svd(Jc);
  const double smin = svd.singularValues()(Jc.rows() - 1);
  if (!(smin > 1e-8)) {
    throw DegenerateError("constraint jacobian rank deficient (sigma_min " +
                          std::to_string(smin) + ")");
  }
}

// (J M^-1 J^T)^-1 and M^-1 J^T.
struct Reduced {
  Mat MinvJt;
  Eigen::LDLT<Mat> S;
};

Reduced reduce(const Mat& M, const Mat& Jc, double eps_M) {
  Reduced r;
  r.MinvJt.resize(M.rows(), Jc.rows());
  for (int i = 0; i < Jc.rows(); ++i) {
    r.MinvJt.col(i) = solve_metric(M, Jc.row(i).transpose(), eps_M);
  }
  r.S.compute(symmetrized(Jc * r.MinvJt));
  if (r.S.info() != Eigen::Success) throw DegenerateError("constraint metric factorization failed");
  return r;
}

}  // namespace

Projectors constraint_projectors(const Mat& M, const Mat& Jc, double eps_M) {
  const int d = static_cast<int>(M.rows());
  if (Jc.cols() != d) throw StructuralError("constraint jacobian does not match metric");
  check_rank(Jc);
  Projectors p;
  if (Jc.rows() == 0) {
    p.perp = Mat::Zero(d, d);
  } else {
    const Reduced r = reduce(M, Jc, eps_M);
    // J^T S^-1 (M^-1 J^T)^T
    p.perp = Jc.transpose() * r.S.solve(r.MinvJt.transpose());
  }
  p.par = Mat::Identity(d, d) - p.perp;
  return p;
}

namespace {

void check_feasible(const EqualityConstraint& c, const State& s, double tol) {
  if (c.rows == 0) return;
  const double cv = c.C(s.q).cwiseAbs().maxCoeff();
  const double vv = (c.jacobian(s.q) * s.qd).cwiseAbs().maxCoeff();
  if (cv > tol || vv > tol) {
    throw PreconditionError("state violates constraint '" + c.name + "' (|C| " +
                            std::to_string(cv) + ", |J qd| " + std::to_string(vv) + ")");
  }
}

Vec effective_curvature(const EqualityConstraint& c, const State& s, const Baumgarte& b) {
  Vec k = c.curvature(s.q, s.qd);
  if (b.enabled) {
    k += 2.0 * b.omega * (c.jacobian(s.q) * s.qd) + b.omega * b.omega * c.C(s.q);
  }
  return k;
}

}  // namespace

Vec constrain_fabric(const ConstrainedTerms& t, const EqualityConstraint& constraint,
                     const State& state, const ConstrainOptions& options) {
  const Vec f = t.xi + t.f_f + t.dpsi + t.B * state.qd;
  if (constraint.rows == 0) return -solve_metric(t.M, f, options.eps_M);
  check_feasible(constraint, state, options.feasibility_tol);
  const Mat Jc = constraint.jacobian(state.q);
  const Projectors p = constraint_projectors(t.M, Jc, options.eps_M);
  const Reduced r = reduce(t.M, Jc, options.eps_M);
  const Vec lift = Jc.transpose() * r.S.solve(effective_curvature(constraint, state, options.baumgarte));
  return -solve_metric(t.M, p.par * f + lift, options.eps_M);
}

Vec lagrange_multipliers(const Mat& M, const Vec& f_total, const EqualityConstraint& constraint,
                         const State& state, double eps_M) {
  if (constraint.rows == 0) return Vec(0);
  const Mat Jc = constraint.jacobian(state.q);
  check_rank(Jc);
  const Reduced r = reduce(M, Jc, eps_M);
  const Vec rhs = -(r.MinvJt.transpose() * f_total) + constraint.curvature(state.q, state.qd);
  return r.S.solve(rhs);
}

Vec multiplier_accel(const Mat& M, const Vec& f_total, const EqualityConstraint& constraint,
                     const State& state, const ConstrainOptions& options) {
  if (constraint.rows == 0) return -solve_metric(M, f_total, options.eps_M);
  check_feasible(constraint, state, options.feasibility_tol);
  const Mat Jc = constraint.jacobian(state.q);
  check_rank(Jc);
  const Reduced r = reduce(M, Jc, options.eps_M);
  const Vec rhs = -(r.MinvJt.transpose() * f_total) +
                  effective_curvature(constraint, state, options.baumgarte);
  const Vec lambda = r.S.solve(rhs);
  return -solve_metric(M, f_total + Jc.transpose() * lambda, options.eps_M);
}

Vec constrained_bending(const ConstrainedTerms& t, const EqualityConstraint& constraint,
                        const State& state, double eps_M) {
  if (constraint.rows == 0) return t.f_f;
  const Mat Jc = constraint.jacobian(state.q);
  const Projectors p = constraint_projectors(t.M, Jc, eps_M);
  const Reduced r = reduce(t.M, Jc, eps_M);
  const Vec lift = Jc.transpose() * r.S.solve(constraint.curvature(state.q, state.qd));
  return p.perp * (-t.xi) + lift + p.par * t.f_f;
}

State project_feasible(const EqualityConstraint& c, const State& state, double tol,
                       int max_iter) {
  if (c.rows == 0) return state;
  Vec q = state.q;
  for (int it = 0; it < max_iter; ++it) {
    const Vec r = c.C(q);
    if (r.cwiseAbs().maxCoeff() <= tol) break;
    const Mat J = c.jacobian(q);
    // Minimum-norm Newton step.
    q -= J.transpose() * (J * J.transpose()).ldlt().solve(r);
    if (it == max_iter - 1) throw SolverFailure("feasibility projection did not converge");
  }
  const Mat J = c.jacobian(q);
  const Vec qd = state.qd - J.transpose() * (J * J.transpose()).ldlt().solve(J * state.qd);
  return State(q, qd);
}

void PenaltySolverConfig::validate() const {
  if (!(dt > 0.0)) throw PreconditionError("penalty solver dt must be positive");
  if (!(lambda >= 0.0)) throw PreconditionError("penalty weight must be nonnegative");
  if (gn_iterations < 1) throw PreconditionError("penalty solver needs at least one iteration");
}

PenaltyStepResult penalty_step(const PenaltyFabric& fabric, const EqualityConstraint& constraint,
                               const Vec& q_prev, const Vec& q_k,
                               const PenaltySolverConfig& config) {
  config.validate();
  const double dt = config.dt;
  const double dt2 = dt * dt;
  const State s(q_k, (q_k - q_prev) / dt);
  const PenaltyFabricEval ev = fabric(s);
  const Mat M = symmetrized(ev.M);
  const int d = static_cast<int>(q_k.size());
  const double stiffness = M.trace() / d / (dt2 * dt2);
  const double w = config.lambda * stiffness;

  const Vec base = 2.0 * q_k - q_prev;
  auto cost_of = [&](const Vec& x) {
    const Vec e = ev.accel_desired - (x - base) / dt2;
    double c = 0.5 * e.dot(M * e);
    if (constraint.rows > 0 && w > 0.0) c += 0.5 * w * constraint.C(x).squaredNorm();
    return c;
  };
  auto gradient_of = [&](const Vec& x) {
    const Vec e = ev.accel_desired - (x - base) / dt2;
    Vec g = -(M * e) / dt2;
    if (constraint.rows > 0 && w > 0.0) {
      g += w * constraint.jacobian(x).transpose() * constraint.C(x);
    }
    return g;
  };

  Vec x = base + dt2 * ev.accel_desired;
  PenaltyStepResult out;
  if (constraint.rows == 0 || w == 0.0) {
    out.q_next = x;
    out.cost = cost_of(x);
    out.gradient_norm = gradient_of(x).norm();
    out.constraint_value = constraint.rows == 0 ? 0.0 : constraint.C(x).cwiseAbs().maxCoeff();
    return out;
  }

  const double c0 = cost_of(x);
  double c_prev = c0;
  bool decreased = false;
  for (int it = 0; it < config.gn_iterations; ++it) {
    const Mat J = constraint.jacobian(x);
    const Mat H = M / (dt2 * dt2) + w * J.transpose() * J;
    const Vec g = gradient_of(x);
    const Vec step = -symmetrized(H).ldlt().solve(g);
    if (!step.allFinite()) throw SolverFailure("Gauss-Newton step is non-finite");
    x += step;
    const double c = cost_of(x);
    if (c < c_prev) decreased = true;
    c_prev = c;
  }
  const double c_final = cost_of(x);
  if (!decreased && c_final > c0) {
    throw SolverFailure("Gauss-Newton cost increased on every iteration (start " +
                        std::to_string(c0) + ", end " + std::to_string(c_final) + ")");
  }
  out.q_next = x;
  out.cost = c_final;
  out.gradient_norm = gradient_of(x).norm();
  out.constraint_value = constraint.C(x).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace fabrica
