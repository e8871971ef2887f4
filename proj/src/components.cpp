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

#include "fabrica/components.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fabrica {

namespace {

double log_cosh(double z) {
  const double a = std::abs(z);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double checked_distance(double x, const std::string& who) {
  if (!(x > 0.0)) {
    throw PenetrationError(who + ": distance " + std::to_string(x) + " is not positive");
  }
  return std::max(x, kBarrierMinDistance);
}

// Cumulative integral of f on [0, R] with cubic Hermite interpolation.
class RadialIntegral {
 public:
  RadialIntegral(std::function<double(double)> f, double R, int n)
      : f_(std::move(f)), R_(R), h_(R / n), F_(n + 1, 0.0) {
    for (int i = 0; i < n; ++i) {
      const double a = i * h_;
      const double b = a + h_;
      F_[i + 1] = F_[i] + h_ / 6.0 * (f_(a) + 4.0 * f_(0.5 * (a + b)) + f_(b));
    }
  }

  double operator()(double r) const {
    if (r >= R_) return F_.back();
    const int i = std::min(static_cast<int>(r / h_), static_cast<int>(F_.size()) - 2);
    const double a = i * h_;
    const double t = (r - a) / h_;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * F_[i] + (t3 - 2 * t2 + t) * h_ * f_(a) +
           (-2 * t3 + 3 * t2) * F_[i + 1] + (t3 - t2) * h_ * f_(a + h_);
  }

 private:
  std::function<double(double)> f_;
  double R_;
  double h_;
  std::vector<double> F_;
};

}  // namespace

void PointAttractionParams::validate() const {
  if (!(m_upper >= m_lower && m_lower > 0.0)) {
    throw PreconditionError("attraction masses need m_upper >= m_lower > 0");
  }
  if (!(alpha_m > 0.0 && k > 0.0 && alpha_psi > 0.0)) {
    throw PreconditionError("attraction gains must be positive");
  }
  if (geometry_gain < 0.0) throw PreconditionError("attraction geometry gain must be nonnegative");
}

double attraction_metric_scale(const PointAttractionParams& p, double r) {
  return (p.m_upper - p.m_lower) * std::exp(-(p.alpha_m * r) * (p.alpha_m * r)) + p.m_lower;
}

Vec attraction_base_gradient(const PointAttractionParams& p, const Vec& x) {
  const double r = x.norm();
  if (r == 0.0) return Vec::Zero(x.size());
  return p.k * std::tanh(p.alpha_psi * r) / r * x;
}

double attraction_base_potential(const PointAttractionParams& p, double r) {
  return p.k * (r + std::log1p(std::exp(-2.0 * p.alpha_psi * r)) / p.alpha_psi);
}

ComponentBundle point_attraction(const PointAttractionParams& p, int dim) {
  p.validate();
  ComponentBundle b;
  auto g = [p](const Vec& x) { return attraction_metric_scale(p, x.norm()); };
  auto grad_g = [p](const Vec& x) {
    const double r2 = x.squaredNorm();
    const double a2 = p.alpha_m * p.alpha_m;
    return Vec(-2.0 * a2 * (p.m_upper - p.m_lower) * std::exp(-a2 * r2) * x);
  };
  b.energy = isotropic_energy("point_attraction", dim, g, grad_g);
  if (p.geometry_gain > 0.0) {
    b.geometry.name = "hd2_attractor";
    b.geometry.claimed_hd2 = true;
    b.geometry.eval = [p](const Vec& x, const Vec& xd) {
      return Vec(-p.geometry_gain * xd.squaredNorm() / p.k * attraction_base_gradient(p, x));
    };
  } else {
    b.geometry = zero_geometry(dim);
    b.geometry.name = "straight_line";
  }

  // psi(r) = m_l k / a log cosh(a r) + (m_u - m_l) k int_0^r exp(-(a_m s)^2) tanh(a s) ds
  const double R = 8.0 / p.alpha_m;
  auto table = std::make_shared<RadialIntegral>(
      [p](double s) {
        return std::exp(-(p.alpha_m * s) * (p.alpha_m * s)) * std::tanh(p.alpha_psi * s);
      },
      R, 8192);
  b.potential.name = "point_attraction";
  b.potential.value = [p, table](const Vec& x) {
    const double r = x.norm();
    return p.m_lower * p.k / p.alpha_psi * log_cosh(p.alpha_psi * r) +
           (p.m_upper - p.m_lower) * p.k * (*table)(r);
  };
  b.potential.gradient = [p](const Vec& x) {
    return Vec(attraction_metric_scale(p, x.norm()) * attraction_base_gradient(p, x));
  };
  return b;
}

void BarrierParams::validate() const {
  if (!(k_b > 0.0 && alpha_b > 0.0 && radius > 0.0)) {
    throw PreconditionError("barrier gains and radius must be positive");
  }
}

TaskMap circle_distance_map(const Vec& center, double radius) {
  TaskMap m;
  m.name = "circle_distance";
  m.in_dim = static_cast<int>(center.size());
  m.out_dim = 1;
  m.phi = [center, radius](const Vec& q) {
    Vec x(1);
    x(0) = (q - center).norm() / radius - 1.0;
    return x;
  };
  m.jacobian = [center, radius](const Vec& q) {
    const Vec d = q - center;
    const double rho = d.norm();
    if (rho == 0.0) throw DomainError("circle distance undefined at the center");
    return Mat((d / (rho * radius)).transpose());
  };
  m.curvature = [center, radius](const Vec& q, const Vec& qd) {
    const Vec d = q - center;
    const double rho = d.norm();
    if (rho == 0.0) throw DomainError("circle distance undefined at the center");
    const double nv = d.dot(qd) / rho;
    Vec out(1);
    out(0) = (qd.squaredNorm() - nv * nv) / (rho * radius);
    return out;
  };
  return m;
}

CircularRepulsion circular_repulsion(const BarrierParams& p) {
  p.validate();
  CircularRepulsion c;
  c.map = circle_distance_map(p.center, p.radius);
  const double kb = p.k_b, ab = p.alpha_b;
  const bool gated = p.velocity_gated;

  c.energy.name = gated ? "barrier_finsler" : "barrier_riemannian";
  c.energy.dim = 1;
  c.energy.eval = [kb, gated](const Vec& x, const Vec& xd, const Vec& gate) {
    const double s = gated ? approach_gate(gate(0)) : 1.0;
    const double xv = checked_distance(x(0), "barrier energy");
    return s * kb / (xv * xv) * xd(0) * xd(0);
  };
  c.energy.analytic = [kb, gated](const Vec& x, const Vec& xd) {
    const double s = gated ? approach_gate(xd(0)) : 1.0;
    const double xv = checked_distance(x(0), "barrier energy");
    Spec out{Mat(1, 1), Vec(1)};
    out.M(0, 0) = 2.0 * s * kb / (xv * xv);
    out.f(0) = s * (-2.0 * kb / (xv * xv * xv)) * xd(0) * xd(0);
    return out;
  };

  c.geometry.name = "barrier_geometry";
  c.geometry.eval = [ab](const Vec& x, const Vec& xd) {
    const double xv = checked_distance(x(0), "barrier geometry");
    const double s = approach_gate(xd(0));
    Vec pi(1);
    pi(0) = 4.0 * ab * s * xd(0) * xd(0) / std::pow(xv, 9);
    return pi;
  };

  c.potential.name = "barrier_potential";
  c.potential.value = [kb, ab](const Vec& x) {
    const double xv = checked_distance(x(0), "barrier potential");
    return 0.4 * ab * kb / std::pow(xv, 10);
  };
  c.potential.gradient = [kb, ab](const Vec& x) {
    const double xv = checked_distance(x(0), "barrier potential");
    Vec g(1);
    g(0) = -4.0 * ab * kb / std::pow(xv, 11);
    if (std::abs(g(0)) > kBarrierForceCeiling) {
      throw PenetrationError("barrier potential above force ceiling at x = " + std::to_string(xv));
    }
    return g;
  };
  return c;
}

ComponentBundle joint_attraction(const JointAttractionParams& p, const Vec& x_d) {
  if (!(p.m > 0.0 && p.k > 0.0 && p.alpha > 0.0)) {
    throw PreconditionError("joint attraction gains must be positive");
  }
  const int d = static_cast<int>(x_d.size());
  ComponentBundle b;
  b.energy = euclidean_energy(d, p.m);
  b.energy.name = "joint_attraction";
  auto grad = [p, x_d](const Vec& x) {
    return Vec(-p.k * p.alpha * (p.alpha * (x_d - x)).array().tanh().matrix());
  };
  b.potential.name = "joint_attraction";
  b.potential.value = [p, x_d](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += log_cosh(p.alpha * (x_d(i) - x(i)));
    return p.k * s;
  };
  b.potential.gradient = grad;
  b.geometry.name = "joint_attraction";
  b.geometry.eval = [grad](const Vec& x, const Vec& xd) { return Vec(-xd.squaredNorm() * grad(x)); };
  return b;
}

namespace {

Potential repulsion_potential(DistanceRepulsionParams p, double k_b) {
  p.k_b = k_b;
  Potential pot;
  pot.name = "distance_repulsion";
  pot.value = [p](const Vec& x) {
    const double xv = checked_distance(x(0), "distance potential");
    return p.k_b / xv + p.k_r / p.alpha * softplus(-p.alpha * (xv - p.x_o));
  };
  pot.gradient = [p](const Vec& x) {
    const double xv = checked_distance(x(0), "distance potential");
    Vec g(1);
    g(0) = -p.k_b / (xv * xv) - p.k_r * logistic(-p.alpha * (xv - p.x_o));
    return g;
  };
  return pot;
}

}  // namespace

ComponentBundle distance_repulsion(const DistanceRepulsionParams& gp,
                                   const DistanceRepulsionParams& pp) {
  for (const auto* p : {&gp, &pp}) {
    if (!(p->k > 0.0 && p->k_b >= 0.0 && p->k_b_potential >= 0.0 && p->k_r >= 0.0 && p->alpha > 0.0 && p->x_o >= 0.0)) {
      throw PreconditionError("distance repulsion gains must be positive");
    }
  }
  ComponentBundle b;
  const double k = gp.k;
  b.energy.name = "distance_repulsion";
  b.energy.dim = 1;
  b.energy.eval = [k](const Vec& x, const Vec& xd, const Vec& gate) {
    const double xv = checked_distance(x(0), "distance energy");
    return approach_gate(gate(0)) * k / (2.0 * xv) * xd(0) * xd(0);
  };
  b.energy.analytic = [k](const Vec& x, const Vec& xd) {
    const double xv = checked_distance(x(0), "distance energy");
    const double s = approach_gate(xd(0));
    Spec out{Mat(1, 1), Vec(1)};
    out.M(0, 0) = s * k / xv;
    out.f(0) = -s * k / (2.0 * xv * xv) * xd(0) * xd(0);
    return out;
  };
  const Potential geometric = repulsion_potential(gp, gp.k_b);
  b.geometry.name = "distance_repulsion";
  b.geometry.eval = [geometric](const Vec& x, const Vec& xd) {
    return Vec(-xd(0) * xd(0) * geometric.gradient(x));
  };
  b.potential = repulsion_potential(pp, pp.k_b_potential);
  return b;
}

ComponentBundle ee_attraction(const EEAttractionParams& gp, const EEAttractionParams& pp,
                              const Vec& x_d) {
  for (const auto* p : {&gp, &pp}) {
    if (!(p->m_upper >= p->m_lower && p->m_lower > 0.0 && p->alpha_m > 0.0 && p->k > 0.0 &&
          p->alpha > 0.0)) {
      throw PreconditionError("end-effector attraction gains must be positive");
    }
  }
  const int d = static_cast<int>(x_d.size());
  ComponentBundle b;
  auto c = [gp, x_d](const Vec& x) {
    const double rho = (x_d - x).norm();
    return 0.5 * (gp.m_upper - gp.m_lower) * (std::tanh(-gp.alpha_m * rho) + 1.0) + gp.m_lower;
  };
  auto grad_c = [gp, x_d](const Vec& x) {
    const Vec e = x - x_d;
    const double rho = e.norm();
    if (rho == 0.0) return Vec(Vec::Zero(x.size()));
    const double th = std::tanh(gp.alpha_m * rho);
    return Vec(-0.5 * (gp.m_upper - gp.m_lower) * gp.alpha_m * (1.0 - th * th) / rho * e);
  };
  b.energy = isotropic_energy("ee_attraction", d, c, grad_c);
  auto grad_psi = [x_d](const EEAttractionParams& p, const Vec& x) {
    const Vec e = x - x_d;
    const double rho = e.norm();
    const double ratio = rho < 1e-12 ? p.alpha : std::tanh(p.alpha * rho) / rho;
    return Vec(p.k * p.alpha * ratio * e);
  };
  b.geometry.name = "ee_attraction";
  b.geometry.eval = [gp, grad_psi](const Vec& x, const Vec& xd) {
    return Vec(-xd.squaredNorm() * grad_psi(gp, x));
  };
  b.potential.name = "ee_attraction";
  b.potential.value = [pp, x_d](const Vec& x) { return pp.k * log_cosh(pp.alpha * (x_d - x).norm()); };
  b.potential.gradient = [pp, grad_psi](const Vec& x) { return grad_psi(pp, x); };
  return b;
}

GeometryPolicy hd2_from_hd0(std::function<Vec(const Vec& x, const Vec& xd_hat)> base,
                            const EnergyFunction& scaler,
                            std::function<double(const Vec& x, const Vec& xd_hat)> gate,
                            const std::vector<State>& hd0_samples) {
  if (!base) throw ConstructionError("hd2_from_hd0 needs a base policy");
  for (const auto& s : hd0_samples) {
    const Vec b0 = base(s.q, s.qd);
    const double scale = std::max(1.0, b0.norm());
    for (double a : {0.5, 2.0, 5.0}) {
      const double err = (base(s.q, a * s.qd) - b0).norm() / scale;
      double gate_err = 0.0;
      if (gate) gate_err = std::abs(gate(s.q, a * s.qd) - gate(s.q, s.qd));
      if (err > 1e-8 || gate_err > 1e-8) {
        throw ConstructionError("hd2_from_hd0: base or gate depends on speed (violation " +
                                std::to_string(std::max(err, gate_err)) + ")");
      }
    }
  }
  GeometryPolicy pi;
  pi.name = "hd2(" + scaler.name + ")";
  pi.claimed_hd2 = true;
  pi.eval = [base, scaler, gate](const Vec& x, const Vec& xd) {
    const double sigma = gate ? gate(x, xd) : 1.0;
    return Vec(scaler(x, xd) * sigma * base(x, xd));
  };
  return pi;
}

SymmetryReport potential_symmetry_check(const std::function<Vec(const Vec&)>& field,
                                        const std::vector<Vec>& samples, double h) {
  SymmetryReport r;
  r.samples = static_cast<int>(samples.size());
  for (const auto& x : samples) {
    const int d = static_cast<int>(x.size());
    Mat D(d, d);
    for (int j = 0; j < d; ++j) {
      const Vec e = h * Vec::Unit(d, j);
      D.col(j) = (field(x + e) - field(x - e)) / (2.0 * h);
    }
    r.max_asymmetry = std::max(r.max_asymmetry, (D - D.transpose()).cwiseAbs().maxCoeff());
  }
  return r;
}

double potential_gradient_error(const Potential& p, const std::vector<Vec>& samples, double h) {
  double worst = 0.0;
  for (const auto& x : samples) {
    const int d = static_cast<int>(x.size());
    const Vec g = p.gradient(x);
    for (int i = 0; i < d; ++i) {
      const Vec e = h * Vec::Unit(d, i);
      const double fd = (p.value(x + e) - p.value(x - e)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g(i)));
    }
  }
  return worst;
}

}  // namespace fabrica
