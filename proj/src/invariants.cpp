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


#include "fabrica/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "fabrica/arm.hpp"
#include "fabrica/energize.hpp"
#include "fabrica/integrator.hpp"
#include "fabrica/particles.hpp"
#include "fabrica/sim.hpp"

namespace fabrica {

bool PropertyResult::passed() const { return samples > 0 && failures == 0 && std::isfinite(worst); }

void PropertyResult::add(double value) {
  ++samples;
  if (!(value <= tolerance)) ++failures;
  if (std::isnan(value)) {
    worst = value;
  } else if (!std::isnan(worst)) {
    worst = std::max(worst, value);
  }
}

void InvariantSuiteConfig::validate() const {
  if (states < 1 || tuples < 1 || derivative_states < 1 || homogeneity_states < 1 ||
      conservation_starts < 1 || conservation_steps < 1 || gate_points < 2) {
    throw ConfigError("invariant sample counts must be positive");
  }
  if (!(dt > 0.0)) throw ConfigError("invariant dt must be positive");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

namespace {

Vec normal_vec(Rng& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Mat random_spd(Rng& rng, int d) {
  const Mat A = Mat(normal_vec(rng, d * d).reshaped(d, d));
  return A.transpose() * A + 0.1 * Mat::Identity(d, d);
}

double rel(double err, double scale) { return err / std::max(scale, 1e-12); }

ComponentSet particle_set(ParticleVariant v) {
  const ParticleWorld world = ParticleWorld::standard();
  ComponentSet set;
  set.name = "particle_" + variant_name(v);
  set.tree = particle_tree(world, ParticleParams{}, v, false);
  set.sample = [world](Rng& rng) {
    for (;;) {
      Vec q(2);
      q << uniform(rng, -4.0, 4.0), uniform(rng, -3.0, 3.0);
      if (world.clearance(q) > 0.2) return State(q, normal_vec(rng, 2));
    }
  };
  set.conservation_start = [world](Rng& rng) {
    for (;;) {
      Vec q(2);
      q << uniform(rng, -4.0, 4.0), uniform(rng, -3.0, 3.0);
      if (world.clearance(q) > 0.5) return State(q, 0.5 * normal_vec(rng, 2).normalized());
    }
  };
  return set;
}

ComponentSet arm_set(ArmVariant v) {
  ArmScene scene;
  scene.q0 = Vec(3);
  scene.q0 << 0.0, 1.0, 1.0;
  Vec target(2);
  target << 0.6, 0.3;
  ComponentSet set;
  set.name = "arm_" + arm_variant_name(v);
  set.tree = arm_tree(scene, ArmFabricParams{}, v, target);
  if (v == ArmVariant::kBaseline) {
    // The baseline wall acts through its potential only, so the unforced
    // baseline has no wall barrier; its conservation run omits the wall.
    ArmScene open = scene;
    open.wall_x = std::numeric_limits<double>::infinity();
    set.conservation_tree = arm_tree(open, ArmFabricParams{}, v, target);
  }
  set.sample = [scene](Rng& rng) {
    for (;;) {
      Vec q(3);
      for (int i = 0; i < 3; ++i) q(i) = uniform(rng, -2.5, 2.5);
      if (arm_wall_clearance(scene, q) > 0.1) return State(q, normal_vec(rng, 3, 0.5));
    }
  };
  set.conservation_start = [scene](Rng& rng) {
    for (;;) {
      Vec q(3);
      for (int i = 0; i < 3; ++i) q(i) = uniform(rng, -2.6, 2.6);
      if (arm_wall_clearance(scene, q) > 0.2) return State(q, 0.5 * normal_vec(rng, 3).normalized());
    }
  };
  return set;
}

// Every attached component with the states it sees for the given root states.
struct LeafSamples {
  const ComponentDef* def;
  std::vector<State> states;
};

void collect(const TreeNode& node, const std::vector<State>& states, std::vector<LeafSamples>& out) {
  for (const auto& a : node.attached) out.push_back({&a.component, states});
  for (const auto& e : node.children) {
    std::vector<State> child;
    child.reserve(states.size());
    for (const auto& s : states) child.push_back(e.map.push(s));
    collect(*e.child, child, out);
  }
}

std::vector<State> sample_states(const ComponentSet& set, Rng& rng, int n) {
  std::vector<State> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(set.sample(rng));
  return out;
}

// x = A q + c * (B q)^2 elementwise; full column rank for generic draws.
TaskMap random_quadratic_map(Rng& rng, int d, int n) {
  const Mat A = Mat(normal_vec(rng, n * d).reshaped(n, d));
  const Mat B = Mat(normal_vec(rng, n * d).reshaped(n, d));
  const Vec c = 0.3 * normal_vec(rng, n);
  TaskMap m;
  m.name = "random_quadratic";
  m.in_dim = d;
  m.out_dim = n;
  m.phi = [A, B, c](const Vec& q) {
    const Vec b = B * q;
    return Vec(A * q + c.cwiseProduct(b.cwiseProduct(b)));
  };
  m.jacobian = [A, B, c](const Vec& q) {
    const Vec b = B * q;
    return Mat(A + 2.0 * c.cwiseProduct(b).asDiagonal() * B);
  };
  m.curvature = [B, c](const Vec&, const Vec& qd) {
    const Vec b = B * qd;
    return Vec(2.0 * c.cwiseProduct(b.cwiseProduct(b)));
  };
  return m;
}

// Smooth non-Euclidean test energy: (1 + |x|^2 / 2) |xd|^2 / 2.
EnergyFunction test_energy(int n) {
  return isotropic_energy(
      "test_isotropic", n, [](const Vec& x) { return 0.5 * (1.0 + 0.5 * x.squaredNorm()); },
      [](const Vec& x) { return Vec(0.5 * x); });
}

double min_singular(const Mat& J) {
  Eigen::JacobiSVD<Mat> svd(J);
  return svd.singularValues().minCoeff();
}

}  // namespace

std::vector<ComponentSet> shipped_component_sets() {
  std::vector<ComponentSet> sets;
  for (auto v : all_particle_variants()) sets.push_back(particle_set(v));
  sets.push_back(arm_set(ArmVariant::kFabric));
  sets.push_back(arm_set(ArmVariant::kBaseline));
  return sets;
}

PropertyResult check_energy_conservation(const ComponentSet& set, const InvariantSuiteConfig& cfg) {
  PropertyResult r{"energy_conservation[" + set.name + "]", 0, 0, 0.0, 1e-5};
  Rng rng(cfg.seed);
  const TransformTree tree = set.conservation_tree.root ? set.conservation_tree : set.tree;
  const EnergyFunction L = tree_energy(tree);
  const Policy policy = [tree](const State& s) { return evaluate_root(tree, s).accel; };
  Integrator rk4;
  rk4.scheme = Scheme::kRK4;
  rk4.dt = cfg.dt;
  for (int i = 0; i < cfg.conservation_starts; ++i) {
    State s = set.conservation_start(rng);
    const double L0 = L(s.q, s.qd);
    double drift = 0.0;
    try {
      for (int k = 0; k < cfg.conservation_steps; ++k) {
        s = step(policy, s, rk4);
        drift = std::max(drift, std::abs(L(s.q, s.qd) - L0) / std::max(std::abs(L0), 1e-12));
      }
    } catch (const Error&) {
      drift = std::numeric_limits<double>::infinity();
    }
    r.add(drift);
  }
  return r;
}

PropertyResult check_zero_work_bending(const ComponentSet& set, const InvariantSuiteConfig& cfg) {
  PropertyResult r{"zero_work_bending[" + set.name + "]", 0, 0, 0.0, 1e-9};
  Rng rng(cfg.seed + 1);
  for (int i = 0; i < cfg.states; ++i) {
    const State s = set.sample(rng);
    const RootEvaluation e = evaluate_root(set.tree, s);
    const Spec& spec = e.component.energy;
    const Vec ff = bending_force(spec, e.pi, s.qd);
    const double scale = s.qd.norm() * (spec.M * e.pi + spec.f).norm();
    r.add(rel(std::abs(s.qd.dot(ff)), scale));
  }
  return r;
}

PropertyResult check_projection_identities(const InvariantSuiteConfig& cfg) {
  PropertyResult r{"projection_identities", 0, 0, 0.0, 1e-9};
  Rng rng(cfg.seed + 2);
  for (int i = 0; i < cfg.states; ++i) {
    const int d = 2 + i % 5;
    const Mat M = random_spd(rng, d);
    const Vec qd = normal_vec(rng, d);
    const Mat P = energy_projector(M, qd);
    const double scale = P.norm();
    const Mat R = inverse_metric(M, 0.0) - qd * qd.transpose() / qd.dot(M * qd);
    const double idem = (P * P - P).norm();
    const double orth = (qd.transpose() * P).norm() / qd.norm();
    const double factor = (P - M * R).norm();
    r.add(rel(std::max({idem, orth, factor}), scale));
  }
  return r;
}

PropertyResult check_pull_energize_commutation(const InvariantSuiteConfig& cfg) {
  PropertyResult r{"pull_energize_commutation", 0, 0, 0.0, 1e-8};
  Rng rng(cfg.seed + 3);
  while (r.samples < cfg.tuples) {
    const int d = 2;
    const int n = 2 + r.samples % 2;
    const TaskMap map = random_quadratic_map(rng, d, n);
    const State s(normal_vec(rng, d), normal_vec(rng, d));
    const Mat J = map.jacobian(s.q);
    if (min_singular(J) < 1e-8 * std::max(1.0, J.norm())) continue;
    const EnergyFunction L = test_energy(n);
    const Mat S = random_spd(rng, n);
    const Vec shift = normal_vec(rng, n);
    const GeometryPolicy geom{"random_hd2",
                              [S, shift](const Vec& x, const Vec& xd) {
                                return Vec(-xd.squaredNorm() * (S * (x - shift)));
                              },
                              true};
    const State xs = map.push(s);
    const Vec Jdqd = map.curvature(s.q, s.qd);
    const Spec ex = euler_lagrange(L, DiffStrategy::analytic(), xs);
    // Energize in the codomain, then pull the energized system.
    const Vec pi_x = geom(xs.q, xs.qd);
    const Vec a_x = pi_x + energization_coefficient(ex, pi_x, xs.qd) * xs.qd;
    const Spec energized_x{ex.M, Vec(-ex.M * a_x)};
    const Vec lhs = resolve(pull_spec(J, Jdqd, energized_x), 0.0);
    // Pull energy and geometry separately, then energize at the root.
    const Spec pulled_energy = pull_spec(J, Jdqd, ex);
    const Spec pulled_geom = pull_spec(J, Jdqd, Spec{ex.M, Vec(-ex.M * pi_x)});
    const Vec pi_q = resolve(pulled_geom, 0.0);
    const Vec rhs = pi_q + energization_coefficient(pulled_energy, pi_q, s.qd) * s.qd;
    r.add(rel((lhs - rhs).norm(), std::max(1.0, lhs.norm())));
  }
  return r;
}

PropertyResult check_pull_euler_lagrange(const InvariantSuiteConfig& cfg) {
  PropertyResult r{"pull_euler_lagrange", 0, 0, 0.0, 1e-5};
  Rng rng(cfg.seed + 4);
  // Polar map and the isotropic test energy.
  TaskMap polar;
  polar.name = "polar";
  polar.in_dim = 2;
  polar.out_dim = 2;
  polar.phi = [](const Vec& q) {
    Vec x(2);
    x << q(0) * std::cos(q(1)), q(0) * std::sin(q(1));
    return x;
  };
  polar.jacobian = [](const Vec& q) {
    Mat J(2, 2);
    J << std::cos(q(1)), -q(0) * std::sin(q(1)), std::sin(q(1)), q(0) * std::cos(q(1));
    return J;
  };
  polar.curvature = [](const Vec& q, const Vec& qd) {
    const double c = std::cos(q(1)), s = std::sin(q(1));
    Vec a(2);
    a << -2.0 * qd(0) * qd(1) * s - q(0) * qd(1) * qd(1) * c,
        2.0 * qd(0) * qd(1) * c - q(0) * qd(1) * qd(1) * s;
    return a;
  };
  const EnergyFunction L = test_energy(2);
  const EnergyFunction pulled = pull_energy(polar, L);
  EnergyFunction composed;  // no analytic form, so only differences apply
  composed.name = "composed";
  composed.dim = 2;
  composed.eval = pulled.eval;
  for (int i = 0; i < cfg.derivative_states; ++i) {
    Vec q(2);
    q << uniform(rng, 0.5, 2.0), uniform(rng, -3.0, 3.0);
    const State s(q, normal_vec(rng, 2));
    const Spec a = pull_spec(polar, euler_lagrange(L, DiffStrategy::analytic(), polar.push(s)), s);
    const Spec b = euler_lagrange(composed, DiffStrategy::finite_difference(), s);
    const double scale = std::max({1.0, a.M.norm(), a.f.norm()});
    r.add(rel(std::max((a.M - b.M).norm(), (a.f - b.f).norm()), scale));
  }
  return r;
}

PropertyResult check_explicit_finsler(const InvariantSuiteConfig& cfg) {
  PropertyResult r{"explicit_finsler_eom", 0, 0, 0.0, 1e-5};
  Rng rng(cfg.seed + 5);
  // G = A(q) + (u . qd_hat)^2 I with A = I + 0.3 q q^T, u = (1, q0).
  const MetricFieldG G = [](const Vec& q, const Vec& qd) {
    const int d = static_cast<int>(q.size());
    Vec u = Vec::Ones(d);
    u(1) = q(0);
    const double c = u.dot(qd) / qd.norm();
    return Mat(Mat::Identity(d, d) + 0.3 * q * q.transpose() + c * c * Mat::Identity(d, d));
  };
  EnergyFunction L;
  L.name = "finsler_test";
  L.dim = 2;
  L.eval = [G](const Vec& q, const Vec& qd, const Vec&) { return 0.5 * qd.dot(G(q, qd) * qd); };
  for (int i = 0; i < cfg.derivative_states; ++i) {
    const State s(normal_vec(rng, 2), normal_vec(rng, 2));
    const Spec a = explicit_finsler_eom(G, s);
    const Spec b = euler_lagrange(L, DiffStrategy::finite_difference(), s);
    const double scale = std::max({1.0, a.M.norm(), a.f.norm()});
    r.add(rel(std::max((a.M - b.M).norm(), (a.f - b.f).norm()), scale));
  }
  return r;
}

std::vector<PropertyResult> check_homogeneity(const ComponentSet& set,
                                              const InvariantSuiteConfig& cfg) {
  PropertyResult geom{"geometry_hd2[" + set.name + "]", 0, 0, 0.0, 1e-6};
  PropertyResult metric{"metric_hd0[" + set.name + "]", 0, 0, 0.0, 1e-6};
  PropertyResult energy{"energy_hd2[" + set.name + "]", 0, 0, 0.0, 1e-6};
  Rng rng(cfg.seed + 6);
  const std::vector<State> roots = sample_states(set, rng, cfg.homogeneity_states);
  std::vector<LeafSamples> leaves;
  collect(*set.tree.root, roots, leaves);
  const std::vector<double> scales = {0.5, 2.0, 5.0};
  for (const auto& leaf : leaves) {
    const ComponentDef& def = *leaf.def;
    if (def.geometry && def.geometry->claimed_hd2) {
      geom.add(geometry_homogeneity_violation(*def.geometry, leaf.states, scales));
    }
    if (def.energy) {
      energy.add(energy_homogeneity_violation(*def.energy, leaf.states, scales));
      double worst = 0.0;
      for (const auto& s : leaf.states) {
        const Mat M0 = euler_lagrange(*def.energy, def.strategy, s).M;
        for (double a : scales) {
          const Mat Ma = euler_lagrange(*def.energy, def.strategy, State(s.q, a * s.qd)).M;
          worst = std::max(worst, rel((Ma - M0).norm(), M0.norm()));
        }
      }
      metric.add(worst);
    }
  }
  // The assembled root energy and geometry.
  const EnergizedFabric root = root_fabric(set.tree);
  geom.add(geometry_homogeneity_violation(root.geometry, roots, scales));
  energy.add(energy_homogeneity_violation(root.energy, roots, scales));
  return {geom, metric, energy};
}

PropertyResult check_finsler_energies(const ComponentSet& set, const InvariantSuiteConfig& cfg) {
  PropertyResult r{"finsler_energies[" + set.name + "]", 0, 0, 0.0, 1e-8};
  Rng rng(cfg.seed + 7);
  std::vector<LeafSamples> leaves;
  collect(*set.tree.root, sample_states(set, rng, cfg.homogeneity_states), leaves);
  for (const auto& leaf : leaves) {
    if (!leaf.def->energy) continue;
    const FinslerReport rep = finsler_checks(*leaf.def->energy, leaf.states, leaf.def->strategy);
    r.add(std::max({rep.nonnegativity, rep.homogeneity, rep.psd}));
  }
  return r;
}

PropertyResult check_reparameterization(const ComponentSet& set, const InvariantSuiteConfig& cfg) {
  PropertyResult r{"reparameterization[" + set.name + "]", 0, 0, 0.0, 1e-6};
  Rng rng(cfg.seed + 8);
  const int d = set.tree.dim();
  while (r.samples < cfg.derivative_states) {
    const State s_old = set.sample(rng);
    const Mat A = Mat::Identity(d, d) + 0.3 * Mat(normal_vec(rng, d * d).reshaped(d, d));
    if (min_singular(A) < 0.1) continue;
    // q_old = A q_new + b with the new state chosen to map onto s_old.
    const Vec q_new = normal_vec(rng, d);
    const Vec b = s_old.q - A * q_new;
    const State s_new(q_new, A.fullPivLu().solve(s_old.qd));
    const ReparameterizationReport rep = reparameterize_check(set.tree, linear_map(A, b), s_new);
    r.add(rel(rep.max_abs_error, std::max(1.0, rep.accel_transported.cwiseAbs().maxCoeff())));
  }
  return r;
}

PropertyResult check_gate_ranges(const InvariantSuiteConfig& cfg) {
  PropertyResult r{"gate_ranges", 0, 0, 0.0, 0.0};
  const ParticleParams pp;
  const ArmFabricParams ap;
  SpeedParams arm_speed;
  arm_speed.alpha_eta = ap.speed.alpha_eta;
  arm_speed.B = ap.speed.B;
  arm_speed.B_floor = ap.speed.B_floor;
  arm_speed.alpha_beta = ap.speed.alpha_beta;
  arm_speed.r = ap.speed.r;
  const std::vector<SpeedControlConfig> configs = {
      make_speed_config(pp.speed, euclidean_energy(2), 2.0),
      make_speed_config(arm_speed, euclidean_energy(3), 0.125)};
  const int n = cfg.gate_points;
  for (const auto& c : configs) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / (n - 1);
      Vec x = Vec::Zero(2);
      x(0) = 20.0 * c.r * u;
      const double sb = damping_gate(x, c);
      const double eta = energy_gate(20.0 * c.target_energy * u, c);
      const double out = std::max({-sb, sb - 1.0, -eta, eta - 1.0, 0.0});
      worst = std::isfinite(sb) && std::isfinite(eta) ? std::max(worst, out)
                                                      : std::numeric_limits<double>::infinity();
    }
    r.add(worst);
  }
  r.samples = static_cast<int>(configs.size()) * n;
  return r;
}

std::vector<PropertyResult> run_invariant_suite(const InvariantSuiteConfig& cfg) {
  cfg.validate();
  const std::vector<ComponentSet> sets = shipped_component_sets();
  std::vector<std::function<std::vector<PropertyResult>()>> jobs;
  jobs.push_back([&] { return std::vector<PropertyResult>{check_projection_identities(cfg)}; });
  jobs.push_back([&] { return std::vector<PropertyResult>{check_pull_energize_commutation(cfg)}; });
  jobs.push_back([&] { return std::vector<PropertyResult>{check_pull_euler_lagrange(cfg)}; });
  jobs.push_back([&] { return std::vector<PropertyResult>{check_explicit_finsler(cfg)}; });
  jobs.push_back([&] { return std::vector<PropertyResult>{check_gate_ranges(cfg)}; });
  for (const auto& set : sets) {
    jobs.push_back([&] { return std::vector<PropertyResult>{check_energy_conservation(set, cfg)}; });
    jobs.push_back([&] { return std::vector<PropertyResult>{check_zero_work_bending(set, cfg)}; });
    jobs.push_back([&] { return check_homogeneity(set, cfg); });
    jobs.push_back([&] { return std::vector<PropertyResult>{check_finsler_energies(set, cfg)}; });
    jobs.push_back([&] { return std::vector<PropertyResult>{check_reparameterization(set, cfg)}; });
  }
  std::vector<std::vector<PropertyResult>> out(jobs.size());
  run_parallel(static_cast<int>(jobs.size()), cfg.jobs, [&](int i) { out[i] = jobs[i](); });
  std::vector<PropertyResult> flat;
  for (auto& v : out) flat.insert(flat.end(), v.begin(), v.end());
  return flat;
}

}  // namespace fabrica
