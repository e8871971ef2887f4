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

#include "fabrica/lagrangian.hpp"

#include <algorithm>
#include <cmath>

namespace fabrica {

DiffStrategy DiffStrategy::finite_difference(double h_first, double h_second) {
  if (!(h_first > 0.0) || !(h_second > 0.0)) {
    throw PreconditionError("finite-difference steps must be positive");
  }
  DiffStrategy s;
  s.mode = Mode::kCentralDifference;
  s.h_first = h_first;
  s.h_second = h_second;
  return s;
}

namespace {

void check_finite(const Spec& s, const std::string& name) {
  if (!s.M.allFinite() || !s.f.allFinite()) {
    throw DomainError("non-finite derivative of energy '" + name + "'");
  }
}

Spec fd_euler_lagrange(const EnergyFunction& L, double h1, double h2, const State& st) {
  const int d = st.dim();
  const Vec& x = st.q;
  const Vec& xd = st.qd;
  const Vec& g = st.qd;
  auto f = [&](const Vec& a, const Vec& b) { return L.eval(a, b, g); };

  Mat M(d, d);
  Mat D(d, d);  // D(i, j) = d2L / dxd_i dx_j
  Vec dLdx(d);
  const double f0 = f(x, xd);
  for (int i = 0; i < d; ++i) {
    Vec ei = Vec::Unit(d, i);
    M(i, i) = (f(x, xd + h2 * ei) - 2.0 * f0 + f(x, xd - h2 * ei)) / (h2 * h2);
    for (int j = 0; j < i; ++j) {
      Vec ej = Vec::Unit(d, j);
      const double v = (f(x, xd + h2 * (ei + ej)) - f(x, xd + h2 * (ei - ej)) -
                        f(x, xd + h2 * (ej - ei)) + f(x, xd - h2 * (ei + ej))) /
                       (4.0 * h2 * h2);
      M(i, j) = v;
      M(j, i) = v;
    }
    for (int j = 0; j < d; ++j) {
      Vec ej = Vec::Unit(d, j);
      D(i, j) = (f(x + h2 * ej, xd + h2 * ei) - f(x - h2 * ej, xd + h2 * ei) -
                 f(x + h2 * ej, xd - h2 * ei) + f(x - h2 * ej, xd - h2 * ei)) /
                (4.0 * h2 * h2);
    }
    dLdx(i) = (f(x + h1 * ei, xd) - f(x - h1 * ei, xd)) / (2.0 * h1);
  }
  Spec out{M, D * xd - dLdx};
  check_finite(out, L.name);
  return out;
}

}  // namespace

Spec euler_lagrange(const EnergyFunction& L, const DiffStrategy& strategy, const State& state) {
  state.validate();
  if (L.dim != 0 && L.dim != state.dim()) {
    throw StructuralError("energy '" + L.name + "' has dimension " + std::to_string(L.dim) +
                          ", state has " + std::to_string(state.dim()));
  }
  Spec out;
  if (strategy.mode == DiffStrategy::Mode::kAnalytic) {
    if (!L.has_analytic()) {
      throw PreconditionError("energy '" + L.name + "' has no analytic derivatives");
    }
    out = L.analytic(state.q, state.qd);
    check_finite(out, L.name);
  } else {
    out = fd_euler_lagrange(L, strategy.h_first, strategy.h_second, state);
  }
  out.M = symmetrized(out.M);
  return out;
}

double hamiltonian(const EnergyFunction& L, const DiffStrategy& strategy, const State& state) {
  state.validate();
  const double l0 = L(state.q, state.qd);
  double p_dot_v;
  if (strategy.mode == DiffStrategy::Mode::kAnalytic && L.has_analytic()) {
    // For energies quadratic in velocity on the active branch, dL/dxd = M xd.
    const Spec s = L.analytic(state.q, state.qd);
    p_dot_v = state.qd.dot(s.M * state.qd);
  } else {
    const double h = strategy.h_first;
    const Vec& g = state.qd;
    p_dot_v = (L.eval(state.q, (1.0 + h) * state.qd, g) -
               L.eval(state.q, (1.0 - h) * state.qd, g)) /
              (2.0 * h);
  }
  const double H = p_dot_v - l0;
  if (!std::isfinite(H)) throw DomainError("non-finite Hamiltonian of '" + L.name + "'");
  return H;
}

double hamiltonian_rate(const Spec& spec, const State& state, const Vec& accel) {
  return state.qd.dot(spec.M * accel + spec.f);
}

Spec explicit_finsler_eom(const MetricFieldG& G, const State& state, double h) {
  state.validate();
  const int d = state.dim();
  const Vec& q = state.q;
  const Vec& v = state.qd;
  const Mat G0 = G(q, v);

  // First partials of G in q and qd, and the mixed second partial.
  std::vector<Mat> dGdq(d), dGdv(d);
  for (int k = 0; k < d; ++k) {
    const Vec e = Vec::Unit(d, k);
    dGdq[k] = (G(q + h * e, v) - G(q - h * e, v)) / (2.0 * h);
    dGdv[k] = (G(q, v + h * e) - G(q, v - h * e)) / (2.0 * h);
  }
  // d2G_ij / dv_l dv_k and d2G_ij / dq_l dv_k, contracted where possible.
  Mat Xi = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      Xi(k, l) += (dGdv[k] * v)(l) + (dGdv[l] * v)(k);
    }
  }
  for (int k = 0; k < d; ++k) {
    const Vec ek = Vec::Unit(d, k);
    for (int l = 0; l < d; ++l) {
      const Vec el = Vec::Unit(d, l);
      const Mat d2 = (G(q, v + h * (ek + el)) - G(q, v + h * (ek - el)) -
                      G(q, v + h * (el - ek)) + G(q, v - h * (ek + el))) /
                     (4.0 * h * h);
      Xi(k, l) += 0.5 * v.dot(d2 * v);
    }
  }

  Vec force = Vec::Zero(d);
  for (int k = 0; k < d; ++k) {
    const Vec ek = Vec::Unit(d, k);
    // Contraction of d2G_ij / dq_l dv_k with qd_l, as a directional difference.
    const Mat mixed = (G(q + h * v, v + h * ek) - G(q - h * v, v + h * ek) -
                       G(q + h * v, v - h * ek) + G(q - h * v, v - h * ek)) /
                      (4.0 * h * h);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double ups = 0.5 * (dGdq[i](k, j) + dGdq[j](i, k) - dGdq[k](i, j) + mixed(i, j));
        s += ups * v(i) * v(j);
      }
    }
    force(k) = s;
  }
  Spec out{symmetrized(G0 + Xi), force};
  if (!out.M.allFinite() || !out.f.allFinite()) {
    throw DomainError("non-finite metric-field derivative");
  }
  return out;
}

bool FinslerReport::passed(double tol) const {
  return nonnegativity <= tol && homogeneity <= tol && psd <= tol;
}

double energy_homogeneity_violation(const EnergyFunction& L, const std::vector<State>& samples,
                                    const std::vector<double>& scales) {
  double worst = 0.0;
  const double p = L.homogeneity_degree;
  for (const auto& s : samples) {
    const double l0 = L(s.q, s.qd);
    for (double a : scales) {
      const double la = L.eval(s.q, a * s.qd, a * s.qd);
      const double expect = std::pow(a, p) * l0;
      const double err = std::abs(la - expect) / std::max(std::abs(expect), 1e-300);
      if (expect == 0.0 && la == 0.0) continue;
      worst = std::max(worst, err);
    }
  }
  return worst;
}

FinslerReport finsler_checks(const EnergyFunction& L, const std::vector<State>& samples,
                             const DiffStrategy& strategy) {
  FinslerReport r;
  r.samples = static_cast<int>(samples.size());
  EnergyFunction as_hd2 = L;
  as_hd2.homogeneity_degree = 2;
  r.homogeneity = energy_homogeneity_violation(as_hd2, samples);
  for (const auto& s : samples) {
    const double l = L(s.q, s.qd);
    r.nonnegativity = std::max(r.nonnegativity, -l);
    const double l_rest = L(s.q, Vec::Zero(s.dim()));
    r.nonnegativity = std::max(r.nonnegativity, std::abs(l_rest));
    const Spec sp = euler_lagrange(L, strategy, s);
    Eigen::SelfAdjointEigenSolver<Mat> eig(sp.M, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, sp.M.cwiseAbs().maxCoeff());
    r.psd = std::max(r.psd, -eig.eigenvalues().minCoeff() / scale);
  }
  return r;
}

EnergyFunction euclidean_energy(int dim, double mass) {
  EnergyFunction L;
  L.name = "euclidean";
  L.dim = dim;
  L.eval = [mass](const Vec&, const Vec& xd, const Vec&) { return 0.5 * mass * xd.squaredNorm(); };
  L.analytic = [mass, dim](const Vec&, const Vec&) {
    return Spec{mass * Mat::Identity(dim, dim), Vec::Zero(dim)};
  };
  return L;
}

EnergyFunction isotropic_energy(std::string name, int dim, std::function<double(const Vec&)> g,
                                std::function<Vec(const Vec&)> grad_g) {
  EnergyFunction L;
  L.name = std::move(name);
  L.dim = dim;
  L.eval = [g](const Vec& x, const Vec& xd, const Vec&) { return g(x) * xd.squaredNorm(); };
  L.analytic = [g, grad_g, dim](const Vec& x, const Vec& xd) {
    const double gx = g(x);
    const Vec dg = grad_g(x);
    Spec s;
    s.M = 2.0 * gx * Mat::Identity(dim, dim);
    s.f = 2.0 * dg.dot(xd) * xd - xd.squaredNorm() * dg;
    return s;
  };
  return L;
}

}  // namespace fabrica
