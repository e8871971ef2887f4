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

// Experiment configuration: strict JSON parsing with per-field
// diagnostics, canonical serialization and the published JSON schema.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fabrica/arm.hpp"
#include "fabrica/integrator.hpp"
#include "fabrica/invariants.hpp"
#include "fabrica/particles.hpp"

namespace fabrica {

enum class ExperimentKind { kParticles, kArmWall, kArmConstraint, kInvariants, kEnergizeDemo };

std::string kind_name(ExperimentKind k);

struct ParticleExperiment {
  ParticleWorld world = ParticleWorld::standard();
  ParticleParams params;
  std::vector<ParticleVariant> variants = all_particle_variants();
  std::vector<double> speeds{2.0, 4.0};
};

struct ArmWallExperiment {
  ArmScene scene;
  ArmFabricParams params;
  WallSchedule schedule;
  std::vector<ArmVariant> variants{ArmVariant::kFabric, ArmVariant::kBaseline};
  RolloutOptions rollout = arm_rollout_options();
};

struct EnergizeDemo {
  Vec qd;
  Vec pi;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kParticles;
  std::uint64_t seed = 1;
  int jobs = 1;
  Integrator integrator;
  std::string output_dir = "out";

  // Only the section matching `kind` is read and written.
  ParticleExperiment particles;
  ArmWallExperiment arm_wall;
  ConstraintExperiment arm_constraint;
  InvariantSuiteConfig invariants;
  EnergizeDemo energize_demo;

  // Copies the shared integrator, seed and jobs into the active section.
  void propagate();
};

ExperimentConfig default_config(ExperimentKind kind);
ConstraintExperiment default_constraint_experiment();

// Throws ConfigError naming the line for syntax errors and the field path
// for schema violations.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical form: every field present, keys sorted, two-space indent,
// trailing newline. serialize_config(parse_config(s)) == s for canonical s.
std::string serialize_config(const ExperimentConfig& config);

// JSON-schema (draft 2020-12) document for experiment configs.
std::string config_schema();

}  // namespace fabrica
