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

#include "fabrica/particles.hpp"

#include <cmath>
#include <memory>

namespace fabrica {

std::string variant_name(ParticleVariant v) {
  switch (v) {
    case ParticleVariant::kUnbentRiemannian: return "unbent_riemannian";
    case ParticleVariant::kUnbentFinsler: return "unbent_finsler";
    case ParticleVariant::kBentRiemannian: return "bent_riemannian";
    case ParticleVariant::kBentFinsler: return "bent_finsler";
  }
  return "unknown";
}

ParticleVariant parse_particle_variant(const std::string& name) {
  for (auto v : all_particle_variants()) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown particle variant '" + name + "'");
}

std::vector<ParticleVariant> all_particle_variants() {
  return {ParticleVariant::kUnbentRiemannian, ParticleVariant::kUnbentFinsler,
          ParticleVariant::kBentRiemannian, ParticleVariant::kBentFinsler};
}

SpeedControlConfig make_speed_config(const SpeedParams& p, EnergyFunction execution_energy,
                                     double target_energy) {
  SpeedControlConfig c;
  c.execution_energy = std::move(execution_energy);
  c.target_energy = target_energy;
  c.alpha_eta = p.alpha_eta;
  c.alpha_shift = p.alpha_shift;
  c.B = p.B;
  c.B_floor = p.B_floor;
  c.alpha_beta = p.alpha_beta;
  c.r = p.r;
  c.boost_gain = p.boost_gain;
  c.eps = p.eps;
  c.eta_blend_enabled = p.eta_blend_enabled;
  c.stall_fraction = p.stall_fraction;
  c.validate();
  return c;
}

ParticleWorld ParticleWorld::standard(int n_starts, double start_x, double spread,
                                      double target_x) {
  ParticleWorld w;
  w.target = Vec::Zero(2);
  w.target(0) = target_x;
  for (int i = 0; i < n_starts; ++i) {
    Vec s(2);
    s(0) = start_x;
    s(1) = n_starts == 1 ? 0.0 : -spread + 2.0 * spread * i / (n_starts - 1);
    if (std::abs(s(1)) < 1e-12) s(1) = 0.0;
    w.starts.push_back(s);
  }
  return w;
}

void ParticleWorld::validate() const {
  if (obstacle_center.size() != 2 || target.size() != 2) {
    throw ConfigError("particle world is two-dimensional");
  }
  if (!(obstacle_radius > 0.0)) throw ConfigError("obstacle radius must be positive");
  for (const auto& s : starts) {
    if (s.size() != 2) throw ConfigError("particle start must be two-dimensional");
    if (clearance(s) <= 0.0) throw ConfigError("particle start inside the obstacle");
  }
}

double ParticleWorld::clearance(const Vec& q) const {
  return (q - obstacle_center).norm() - obstacle_radius;
}

bool ParticleWorld::on_centerline(const Vec& start) const {
  // Collinear with the obstacle center and the target.
  const Vec a = obstacle_center - target;
  const Vec b = start - target;
  return std::abs(a(0) * b(1) - a(1) * b(0)) < 1e-9 * (a.norm() * b.norm() + 1.0);
}

TransformTree particle_tree(const ParticleWorld& world, const ParticleParams& params,
                            ParticleVariant variant, bool with_potentials) {
  const ComponentBundle attraction = point_attraction(params.attraction, 2);

  auto attr_node = std::make_shared<TreeNode>();
  attr_node->name = "attraction";
  attr_node->dim = 2;
  ComponentDef attr;
  attr.name = "attraction";
  attr.energy = attraction.energy;
  if (is_bent(variant)) attr.geometry = attraction.geometry;
  if (with_potentials) attr.potential = attraction.potential;
  attr_node->attached.push_back({Weight(1.0), attr});

  BarrierParams bp;
  bp.k_b = params.k_b;
  bp.alpha_b = params.alpha_b;
  bp.velocity_gated = is_finsler(variant);
  bp.radius = world.obstacle_radius;
  bp.center = world.obstacle_center;
  const CircularRepulsion barrier = circular_repulsion(bp);

  auto obs_node = std::make_shared<TreeNode>();
  obs_node->name = "obstacle";
  obs_node->dim = 1;
  ComponentDef obs;
  obs.name = "obstacle";
  obs.energy = barrier.energy;
  if (is_bent(variant)) {
    obs.geometry = barrier.geometry;
  } else if (with_potentials) {
    obs.potential = barrier.potential;
  }
  obs_node->attached.push_back({Weight(1.0), obs});

  auto root = std::make_shared<TreeNode>();
  root->name = "particle";
  root->dim = 2;
  root->children.push_back({linear_map(Mat::Identity(2, 2), -world.target), attr_node});
  root->children.push_back({barrier.map, obs_node});
  root->validate();
  return TransformTree{root};
}

ForcedFabric particle_fabric(const ParticleWorld& world, const ParticleParams& params,
                             ParticleVariant variant, double v_d) {
  if (!(v_d > 0.0)) throw ConfigError("desired speed must be positive");
  ForcedFabric f;
  f.tree = particle_tree(world, params, variant);
  f.speed = make_speed_config(params.speed, euclidean_energy(2, 1.0), 0.5 * v_d * v_d);
  const Vec target = world.target;
  f.goal_error = [target](const Vec& q) { return Vec(q - target); };
  const TaskMap dist = circle_distance_map(world.obstacle_center, world.obstacle_radius);
  const double active = params.active_distance;
  f.active_constraints = [dist, active](const Vec& q) {
    if (dist.phi(q)(0) < active) return dist.jacobian(q);
    return Mat(0, 2);
  };
  return f;
}

ParticleRun run_particle(const ParticleWorld& world, const ParticleParams& params,
                         ParticleVariant variant, double v_d, int index) {
  ParticleRun run;
  run.variant = variant;
  run.v_d = v_d;
  run.index = index;
  run.start = world.starts.at(index);
  run.centerline = world.on_centerline(run.start);
  const ForcedFabric fabric = particle_fabric(world, params, variant, v_d);
  SpeedControlState sc;
  run.rollout = rollout(fabric, State(run.start, Vec::Zero(2)), params.rollout,
                        [&world](const Vec& q) { return world.clearance(q); }, sc);
  return run;
}

std::vector<ParticleRun> run_particles(const ParticleWorld& world, const ParticleParams& params,
                                       const std::vector<ParticleVariant>& variants,
                                       const std::vector<double>& speeds, int jobs) {
  world.validate();
  struct Job {
    ParticleVariant v;
    double speed;
    int index;
  };
  std::vector<Job> list;
  for (auto v : variants) {
    for (double s : speeds) {
      for (int i = 0; i < static_cast<int>(world.starts.size()); ++i) list.push_back({v, s, i});
    }
  }
  std::vector<ParticleRun> out(list.size());
  run_parallel(static_cast<int>(list.size()), jobs, [&](int j) {
    out[j] = run_particle(world, params, list[j].v, list[j].speed, list[j].index);
  });
  return out;
}

}  // namespace fabrica
