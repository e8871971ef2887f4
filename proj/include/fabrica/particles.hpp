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

#include <string>
#include <vector>

#include "fabrica/components.hpp"
#include "fabrica/sim.hpp"

namespace fabrica {

enum class ParticleVariant { kUnbentRiemannian, kUnbentFinsler, kBentRiemannian, kBentFinsler };

std::string variant_name(ParticleVariant v);
ParticleVariant parse_particle_variant(const std::string& name);
std::vector<ParticleVariant> all_particle_variants();
inline bool is_bent(ParticleVariant v) {
  return v == ParticleVariant::kBentRiemannian || v == ParticleVariant::kBentFinsler;
}
inline bool is_finsler(ParticleVariant v) {
  return v == ParticleVariant::kUnbentFinsler || v == ParticleVariant::kBentFinsler;
}

struct SpeedParams {
  double alpha_eta = 20.0;
  double alpha_shift = 0.0;
  double B = 3.0;
  double B_floor = 1.0;
  double alpha_beta = 4.0;
  double r = 1.0;
  double boost_gain = 8.0;
  double eps = 1e-6;
  bool eta_blend_enabled = true;
  double stall_fraction = 0.8;
};

SpeedControlConfig make_speed_config(const SpeedParams& p, EnergyFunction execution_energy,
                                     double target_energy);

struct ParticleWorld {
  Vec obstacle_center = Vec::Zero(2);
  double obstacle_radius = 1.0;
  Vec target = Vec::Zero(2);
  std::vector<Vec> starts;

  // Obstacle at the origin, target left of it, a column of starts on the right.
  static ParticleWorld standard(int n_starts = 9, double start_x = 3.0, double spread = 2.0,
                                double target_x = -3.0);
  void validate() const;
  double clearance(const Vec& q) const;
  bool on_centerline(const Vec& start) const;
};

// Tuned particle attraction: strong saturated pull, soft near the goal, HD2 steering.
inline PointAttractionParams particle_attraction_defaults() {
  PointAttractionParams p;
  p.m_upper = 1.0;
  p.m_lower = 0.2;
  p.alpha_m = 2.0;
  p.k = 10.0;
  p.alpha_psi = 0.5;
  p.geometry_gain = 5.0;
  return p;
}

struct ParticleParams {
  PointAttractionParams attraction = particle_attraction_defaults();
  double k_b = 0.05;
  double alpha_b = 0.5;
  SpeedParams speed;
  RolloutOptions rollout;
  double active_distance = 0.5;  // barrier distance counted as an active constraint
};

// Attraction node on x = q - q_d and obstacle node on the circle distance.
TransformTree particle_tree(const ParticleWorld& world, const ParticleParams& params,
                            ParticleVariant variant, bool with_potentials = true);

ForcedFabric particle_fabric(const ParticleWorld& world, const ParticleParams& params,
                             ParticleVariant variant, double v_d);

struct ParticleRun {
  ParticleVariant variant;
  double v_d = 0.0;
  int index = 0;
  Vec start;
  bool centerline = false;
  Rollout rollout;
};

ParticleRun run_particle(const ParticleWorld& world, const ParticleParams& params,
                         ParticleVariant variant, double v_d, int index);

// Every (variant, speed, start) triple, ordered variant-major.
std::vector<ParticleRun> run_particles(const ParticleWorld& world, const ParticleParams& params,
                                       const std::vector<ParticleVariant>& variants,
                                       const std::vector<double>& speeds, int jobs = 1);

}  // namespace fabrica
