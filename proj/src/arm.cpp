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

#include "fabrica/arm.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "fabrica/metrics.hpp"
#include "fabrica/particles.hpp"

namespace fabrica {

PlanarArm PlanarArm::standard(int links, double length, double limit) {
  PlanarArm a;
  a.link_lengths.assign(links, length);
  a.joint_limits.assign(links, {-limit, limit});
  a.body_fractions = {0.5, 1.0};
  return a;
}

double PlanarArm::reach() const {
  double r = 0.0;
  for (double l : link_lengths) r += l;
  return r;
}

void PlanarArm::validate() const {
  if (link_lengths.empty()) throw ConfigError("arm needs at least one link");
  if (joint_limits.size() != link_lengths.size()) {
    throw ConfigError("arm needs one joint limit pair per link");
  }
  for (double l : link_lengths) {
    if (!(l > 0.0)) throw ConfigError("arm link lengths must be positive");
  }
  for (const auto& [lo, hi] : joint_limits) {
    if (!(lo < hi)) throw ConfigError("arm joint limits need lo < hi");
  }
  for (double f : body_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("body point fractions must lie in (0, 1]");
  }
}

TaskMap arm_point_map(const PlanarArm& arm, int link, double fraction) {
  const int n = arm.dof();
  if (link < 0 || link >= n) throw StructuralError("arm point on a nonexistent link");
  const std::vector<double> L = arm.link_lengths;
  // Effective length of each link up to the point; zero past it.
  std::vector<double> c(n, 0.0);
  for (int j = 0; j < link; ++j) c[j] = L[j];
  c[link] = fraction * L[link];

  TaskMap m;
  m.name = "arm_point_" + std::to_string(link) + "_" + std::to_string(fraction);
  m.in_dim = n;
  m.out_dim = 2;
  m.phi = [c, link](const Vec& q) {
    Vec p = Vec::Zero(2);
    double th = 0.0;
    for (int j = 0; j <= link; ++j) {
      th += q(j);
      p(0) += c[j] * std::cos(th);
      p(1) += c[j] * std::sin(th);
    }
    return p;
  };
  m.jacobian = [c, link, n](const Vec& q) {
    Mat J = Mat::Zero(2, n);
    double th = 0.0;
    for (int j = 0; j <= link; ++j) {
      th += q(j);
      // Link j's tip moves with every joint k <= j.
      for (int k = 0; k <= j; ++k) {
        J(0, k) -= c[j] * std::sin(th);
        J(1, k) += c[j] * std::cos(th);
      }
    }
    return J;
  };
  m.curvature = [c, link](const Vec& q, const Vec& qd) {
    Vec a = Vec::Zero(2);
    double th = 0.0;
    double w = 0.0;
    for (int j = 0; j <= link; ++j) {
      th += q(j);
      w += qd(j);
      a(0) -= c[j] * std::cos(th) * w * w;
      a(1) -= c[j] * std::sin(th) * w * w;
    }
    return a;
  };
  return m;
}

TaskMap arm_ee_map(const PlanarArm& arm) {
  TaskMap m = arm_point_map(arm, arm.dof() - 1, 1.0);
  m.name = "arm_ee";
  return m;
}

TaskMap wall_distance_map(const TaskMap& point, double wall_x) {
  Mat A(1, 2);
  A << -1.0, 0.0;
  Vec b(1);
  b << wall_x;
  TaskMap m = compose(linear_map(A, b), point);
  m.name = "wall_distance(" + point.name + ")";
  return m;
}

TaskMap point_distance_map(const TaskMap& point, const Vec& center) {
  TaskMap dist;
  dist.name = "distance";
  dist.in_dim = 2;
  dist.out_dim = 1;
  dist.phi = [center](const Vec& p) {
    Vec x(1);
    x(0) = (p - center).norm();
    return x;
  };
  dist.jacobian = [center](const Vec& p) {
    const Vec d = p - center;
    const double r = d.norm();
    Mat J(1, 2);
    if (r == 0.0) {
      J.setZero();
    } else {
      J.row(0) = (d / r).transpose();
    }
    return J;
  };
  dist.curvature = [center](const Vec& p, const Vec& pd) {
    const Vec d = p - center;
    const double r = d.norm();
    Vec a(1);
    a(0) = r == 0.0 ? 0.0 : (pd.squaredNorm() - std::pow(d.dot(pd) / r, 2)) / r;
    return a;
  };
  TaskMap m = compose(dist, point);
  m.name = "point_distance(" + point.name + ")";
  return m;
}

TaskMap joint_limit_map(const PlanarArm& arm, int joint, bool upper) {
  const int n = arm.dof();
  if (joint < 0 || joint >= n) throw StructuralError("joint limit on a nonexistent joint");
  const auto [lo, hi] = arm.joint_limits[joint];
  Mat A = Mat::Zero(1, n);
  A(0, joint) = upper ? -1.0 : 1.0;
  Vec b(1);
  b(0) = upper ? hi : -lo;
  TaskMap m = linear_map(A, b);
  m.name = std::string(upper ? "upper" : "lower") + "_limit_" + std::to_string(joint);
  return m;
}

ArmMaps arm_forward_maps(const PlanarArm& arm, double wall_x) {
  arm.validate();
  ArmMaps maps;
  maps.ee = arm_ee_map(arm);
  for (int i = 0; i < arm.dof(); ++i) {
    for (double f : arm.body_fractions) {
      if (i == arm.dof() - 1 && f == 1.0) continue;
      maps.body_points.push_back(arm_point_map(arm, i, f));
    }
  }
  maps.body_points.push_back(maps.ee);
  if (std::isfinite(wall_x)) {
    for (const auto& p : maps.body_points) maps.wall_distances.push_back(wall_distance_map(p, wall_x));
  }
  for (int j = 0; j < arm.dof(); ++j) {
    maps.joint_limits.push_back(joint_limit_map(arm, j, false));
    maps.joint_limits.push_back(joint_limit_map(arm, j, true));
  }
  return maps;
}

std::string arm_variant_name(ArmVariant v) {
  return v == ArmVariant::kFabric ? "fabric" : "baseline";
}

ArmVariant parse_arm_variant(const std::string& name) {
  if (name == "fabric") return ArmVariant::kFabric;
  if (name == "baseline") return ArmVariant::kBaseline;
  throw ConfigError("unknown arm variant '" + name + "'");
}

namespace {

DistanceRepulsionParams scaled_potential(const DistanceRepulsionParams& p, double s) {
  DistanceRepulsionParams out = p;
  out.k_b_potential *= s;
  out.k_r *= s;
  return out;
}

// Repulsion component for one distance space under the chosen variant.
ComponentDef repulsion_component(const std::string& name, const DistanceRepulsionParams& p,
                                 const ArmFabricParams& params, ArmVariant variant) {
  const DistanceRepulsionParams pot = scaled_potential(p, 1.0 / params.geometry_ratio);
  ComponentDef def;
  def.name = name;
  if (variant == ArmVariant::kFabric) {
    const ComponentBundle b = distance_repulsion(p, pot);
    def.energy = b.energy;
    def.geometry = b.geometry;
    def.potential = b.potential;
  } else {
    const ComponentBundle b =
        distance_repulsion(p, scaled_potential(pot, params.baseline_potential_scale));
    def.energy = b.energy;
    def.potential = b.potential;
  }
  return def;
}

std::shared_ptr<TreeNode> leaf(const std::string& name, int dim, ComponentDef def) {
  auto node = std::make_shared<TreeNode>();
  node->name = name;
  node->dim = dim;
  node->attached.push_back({Weight(1.0), std::move(def)});
  return node;
}

}  // namespace

TransformTree arm_tree(const ArmScene& scene, const ArmFabricParams& params, ArmVariant variant,
                       const Vec& ee_target) {
  const PlanarArm& arm = scene.arm;
  const ArmMaps maps = arm_forward_maps(arm, scene.wall_x);
  const int n = arm.dof();
  const Vec posture = params.posture_target.size() == n ? params.posture_target : scene.q0;
  if (posture.size() != n) throw ConfigError("arm posture target needs one entry per joint");

  auto root = std::make_shared<TreeNode>();
  root->name = "joints";
  root->dim = n;

  // The fabric postures through geometry only; the baseline uses the
  // posture potential as a forcing term like its other components.
  JointAttractionParams pp = params.posture;
  if (variant == ArmVariant::kBaseline) pp.k *= params.baseline_posture_scale;
  const ComponentBundle pb = joint_attraction(pp, posture);
  ComponentDef posture_def;
  posture_def.name = "posture";
  posture_def.energy = pb.energy;
  if (variant == ArmVariant::kFabric) {
    posture_def.geometry = pb.geometry;
  } else {
    posture_def.potential = pb.potential;
  }
  root->attached.push_back({Weight(1.0), posture_def});

  // Joint limits are shared by both variants; only the wall encoding differs.
  for (const auto& m : maps.joint_limits) {
    root->children.push_back(
        {m, leaf(m.name, 1, repulsion_component(m.name, params.limit, params, ArmVariant::kFabric))});
  }

  const ComponentBundle eb = ee_attraction(params.ee, params.ee, ee_target);
  ComponentDef ee_def;
  ee_def.name = "ee_attraction";
  ee_def.energy = eb.energy;
  ee_def.geometry = eb.geometry;
  ee_def.potential = eb.potential;
  root->children.push_back({maps.ee, leaf("ee", 2, ee_def)});

  for (const auto& m : maps.wall_distances) {
    root->children.push_back({m, leaf(m.name, 1, repulsion_component(m.name, params.wall, params, variant))});
  }
  root->validate();
  return TransformTree{root};
}

ForcedFabric arm_fabric(const ArmScene& scene, const ArmFabricParams& params, ArmVariant variant,
                        const Vec& ee_target) {
  ForcedFabric f;
  f.tree = arm_tree(scene, params, variant, ee_target);
  const ArmSpeedParams& sp = params.speed;
  SpeedParams s;
  s.alpha_eta = sp.alpha_eta;
  s.B = sp.B;
  s.B_floor = sp.B_floor;
  s.alpha_beta = sp.alpha_beta;
  s.r = sp.r;
  s.boost_gain = sp.boost_gain;
  s.stall_fraction = 0.0;
  f.speed = make_speed_config(s, euclidean_energy(scene.arm.dof(), 1.0),
                              0.5 * sp.target_speed * sp.target_speed);
  const TaskMap ee = arm_ee_map(scene.arm);
  f.goal_error = [ee, ee_target](const Vec& q) { return Vec(ee.phi(q) - ee_target); };

  const ArmMaps maps = arm_forward_maps(scene.arm, scene.wall_x);
  std::vector<TaskMap> distances = maps.wall_distances;
  distances.insert(distances.end(), maps.joint_limits.begin(), maps.joint_limits.end());
  const double active = params.active_distance;
  const int n = scene.arm.dof();
  f.active_constraints = [distances, active, n](const Vec& q) {
    Mat J(0, n);
    for (const auto& m : distances) {
      if (m.phi(q)(0) < active) {
        J.conservativeResize(J.rows() + 1, n);
        J.row(J.rows() - 1) = m.jacobian(q);
      }
    }
    return J;
  };
  return f;
}

double arm_wall_clearance(const ArmScene& scene, const Vec& q) {
  if (!std::isfinite(scene.wall_x)) return std::numeric_limits<double>::infinity();
  const ArmMaps maps = arm_forward_maps(scene.arm, scene.wall_x);
  double c = std::numeric_limits<double>::infinity();
  for (const auto& m : maps.wall_distances) c = std::min(c, m.phi(q)(0));
  return c;
}

std::vector<double> WallSchedule::distances() const {
  if (!(step > 0.0) || !(start_twd >= end_twd)) {
    throw ConfigError("wall schedule needs step > 0 and start >= end");
  }
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((start_twd - end_twd) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(start_twd - i * step);
  return out;
}

namespace {

void append(Rollout& dst, const Rollout& src) {
  dst.dim = src.dim;
  for (size_t i = 0; i < src.t.size(); ++i) {
    if (!dst.t.empty() && src.t[i] <= dst.t.back()) continue;
    dst.t.push_back(src.t[i]);
    dst.q.push_back(src.q[i]);
    dst.qd.push_back(src.qd[i]);
    dst.H.push_back(src.H[i]);
    dst.Le.push_back(src.Le[i]);
    dst.Lex.push_back(src.Lex[i]);
    dst.min_dist.push_back(src.min_dist[i]);
  }
  dst.events.insert(dst.events.end(), src.events.begin(), src.events.end());
  dst.penetrated = dst.penetrated || src.penetrated;
  dst.diverged = dst.diverged || src.diverged;
  dst.max_speed = std::max(dst.max_speed, src.max_speed);
  dst.min_clearance = dst.t.size() == src.t.size() ? src.min_clearance
                                                   : std::min(dst.min_clearance, src.min_clearance);
  dst.final_time = src.final_time;
  dst.final_state = src.final_state;
  dst.final_error = src.final_error;
  dst.final_speed = src.final_speed;
  dst.final_projected_gradient = src.final_projected_gradient;
  dst.converged = src.converged;
  dst.settled = src.settled;
}

}  // namespace

RolloutOptions arm_rollout_options() {
  RolloutOptions o;
  o.stop_on_converge = false;
  o.stop_on_settle = false;
  o.stationary_gradient = 1e-2;
  return o;
}

WallResult run_wall_experiment(const ArmScene& scene, const ArmFabricParams& params,
                               const WallSchedule& schedule, ArmVariant variant,
                               const RolloutOptions& options) {
  scene.arm.validate();
  if (scene.q0.size() != scene.arm.dof()) throw ConfigError("arm q0 needs one entry per joint");
  WallResult res;
  res.variant = variant;
  RolloutOptions opt = options;
  opt.t_max = schedule.hold_time;
  const TaskMap ee = arm_ee_map(scene.arm);

  State s(scene.q0, Vec::Zero(scene.arm.dof()));
  double t = 0.0;
  for (double twd : schedule.distances()) {
    WallRow row;
    row.twd = twd;
    row.target = Vec(2);
    row.target << scene.wall_x - twd, schedule.target_y;
    const ForcedFabric fabric = arm_fabric(scene, params, variant, row.target);
    SpeedControlState sc;
    const Rollout r = rollout(fabric, s, opt, [&scene](const Vec& q) { return arm_wall_clearance(scene, q); },
                              sc, t);
    append(res.trajectory, r);
    s = r.final_state;
    t = r.final_time;
    const Vec p = ee.phi(s.q);
    row.ete = (p - row.target).norm();
    row.ewd = scene.wall_x - p(0);
    row.final_speed = r.final_speed;
    row.projected_gradient = r.final_projected_gradient;
    row.min_clearance = r.min_clearance;
    row.penetrated = r.penetrated || r.diverged;
    res.rows.push_back(row);
    if (row.penetrated) break;
  }
  return res;
}

EqualityConstraint ee_line_constraint(const PlanarArm& arm, const LineConstraint& line) {
  if (line.normal.size() != 2 || !(line.normal.norm() > 0.0)) {
    throw ConfigError("line constraint needs a nonzero 2-D normal");
  }
  const Vec n = line.normal.normalized();
  const double off = line.offset;
  const TaskMap ee = arm_ee_map(arm);
  EqualityConstraint c;
  c.name = "ee_on_line";
  c.dim = arm.dof();
  c.rows = 1;
  c.C = [ee, n, off](const Vec& q) {
    Vec r(1);
    r(0) = n.dot(ee.phi(q)) - off;
    return r;
  };
  c.jacobian = [ee, n](const Vec& q) { return Mat(n.transpose() * ee.jacobian(q)); };
  c.curvature = [ee, n](const Vec& q, const Vec& qd) {
    Vec r(1);
    r(0) = n.dot(ee.curvature(q, qd));
    return r;
  };
  return c;
}

ConstrainedTerms forced_terms(const ForcedFabric& fabric, const State& s,
                              const SpeedControlState& sc) {
  const ForcedFabric::Eval e = fabric.evaluate(s, sc);
  ConstrainedTerms t;
  t.M = e.component.energy.M;
  t.xi = e.component.energy.f;
  t.dpsi = e.component.potential_gradient;
  const double a_Le = e.reg.alpha_Le;
  // The alpha_Le part of the speed regulation keeps the bending zero-work;
  // the remainder is a damping along the metric.
  t.f_f = -(t.M * e.pi + t.xi) - a_Le * (t.M * s.qd);
  t.B = (a_Le - e.reg.alpha_reg) * t.M;
  return t;
}

ConstraintResult run_constraint_experiment(const ConstraintExperiment& exp) {
  const ArmScene& scene = exp.scene;
  scene.arm.validate();
  exp.solver.validate();
  if (scene.q0.size() != scene.arm.dof()) throw ConfigError("arm q0 needs one entry per joint");
  const EqualityConstraint con = ee_line_constraint(scene.arm, exp.line);
  const ForcedFabric fabric = arm_fabric(scene, exp.params, ArmVariant::kFabric, exp.target);
  const TaskMap ee = arm_ee_map(scene.arm);
  const Vec n = exp.line.normal.normalized();

  ConstraintResult res;
  res.closest_feasible = exp.target - (n.dot(exp.target) - exp.line.offset) * n;

  State s0 = project_feasible(con, State(scene.q0, Vec::Zero(scene.arm.dof())));
  SpeedControlState sc;
  auto goal = [&](const Vec& q) { return fabric.goal_error(q); };
  const PenaltyFabric pf = [&](const State& s) {
    const ForcedFabric::Eval e = fabric.evaluate(s, sc);
    return PenaltyFabricEval{e.component.energy.M, e.accel};
  };

  const double dt = exp.solver.dt;
  Vec q_prev = s0.q;
  Vec q = s0.q;
  double t = 0.0;
  double settle = 0.0;
  auto record = [&](const State& s) {
    res.trajectory.t.push_back(t);
    res.trajectory.q.push_back(s.q);
    res.trajectory.qd.push_back(s.qd);
    const ForcedFabric::Eval e = fabric.evaluate(s, sc);
    res.trajectory.Le.push_back(e.component.energy_value);
    res.trajectory.H.push_back(e.component.energy_value + e.component.potential_value);
    res.trajectory.Lex.push_back(e.reg.L_ex);
    res.trajectory.min_dist.push_back(std::abs(con.C(s.q)(0)));
  };
  res.trajectory.dim = scene.arm.dof();
  record(s0);
  const long steps = static_cast<long>(std::llround(exp.t_max / dt));
  for (long k = 0; k < steps; ++k) {
    update_speed_state(State(q, (q - q_prev) / dt), goal(q), fabric.speed, sc);
    const PenaltyStepResult r = penalty_step(pf, con, q_prev, q, exp.solver);
    q_prev = q;
    q = r.q_next;
    t += dt;
    res.max_violation = std::max(res.max_violation, r.constraint_value);
    const State s(q, (q - q_prev) / dt);
    record(s);
    settle = s.qd.norm() < exp.settle_speed ? settle + dt : 0.0;
    if (settle >= exp.settle_time - 1e-12) {
      res.settled = true;
      const FabricComponent c = tree_evaluate(fabric.tree, s);
      if (projected_gradient_norm(c.energy.M, con.jacobian(q), c.potential_gradient) <
          exp.stationary_gradient) {
        res.stationary = true;
        break;
      }
    }
  }
  const State sf(q, (q - q_prev) / dt);
  res.settled = settle >= exp.settle_time - 1e-12;
  res.final_time = t;
  res.final_speed = sf.qd.norm();
  res.final_distance = (ee.phi(q) - res.closest_feasible).norm();
  const FabricComponent c = tree_evaluate(fabric.tree, sf);
  res.final_projected_gradient =
      projected_gradient_norm(c.energy.M, con.jacobian(q), c.potential_gradient);
  res.trajectory.final_time = t;
  res.trajectory.final_state = sf;
  res.trajectory.final_speed = res.final_speed;
  res.trajectory.final_error = res.final_distance;
  res.trajectory.settled = res.settled;
  res.trajectory.converged = res.settled && res.final_distance < 1e-3;
  res.trajectory.final_projected_gradient = res.final_projected_gradient;

  // Continuous-time paths from the same feasible start.
  ConstrainOptions copt;
  copt.feasibility_tol = exp.feasibility_tol;
  const SpeedControlState sc_cmp;
  const Policy projector = [&](const State& s) {
    return constrain_fabric(forced_terms(fabric, s, sc_cmp), con, s, copt);
  };
  const Policy multiplier = [&](const State& s) {
    const ConstrainedTerms terms = forced_terms(fabric, s, sc_cmp);
    const Vec f_total = terms.xi + terms.f_f + terms.dpsi + terms.B * s.qd;
    return multiplier_accel(terms.M, f_total, con, s, copt);
  };
  Integrator rk4;
  rk4.scheme = Scheme::kRK4;
  rk4.dt = exp.compare_dt;
  State a = s0;
  State b = s0;
  const long n_cmp = static_cast<long>(std::llround(exp.compare_time / exp.compare_dt));
  for (long k = 0; k < n_cmp; ++k) {
    a = step(projector, a, rk4);
    b = step(multiplier, b, rk4);
    res.path_difference = std::max(res.path_difference, (a.q - b.q).cwiseAbs().maxCoeff());
    res.comparison_violation = std::max(res.comparison_violation, std::abs(con.C(a.q)(0)));
  }
  return res;
}

}  // namespace fabrica
