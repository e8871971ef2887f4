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


// Runtime property suite: conservation, zero-work bending, projector
// identities, commutation checks and homogeneity of every shipped component.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fabrica/transform.hpp"

namespace fabrica {

struct PropertyResult {
  std::string name;
  int samples = 0;
  int failures = 0;
  double worst = 0.0;
  double tolerance = 0.0;

  bool passed() const;
  // Records one sample value against the tolerance.
  void add(double value);
};

using Rng = std::mt19937_64;

// A shipped tree with a sampler of admissible root states.
struct ComponentSet {
  std::string name;
  TransformTree tree;
  std::function<State(Rng&)> sample;
  // Conservation starts: clear of every barrier, root speed 0.5 in a random direction.
  std::function<State(Rng&)> conservation_start;
  // Tree for unforced rollouts; empty means `tree`.
  TransformTree conservation_tree;
};

// The four particle trees and both arm trees at their default parameters.
std::vector<ComponentSet> shipped_component_sets();

struct InvariantSuiteConfig {
  std::uint64_t seed = 1;
  int states = 1000;             // zero-work and projector samples
  int tuples = 100;              // commutation samples
  int derivative_states = 50;    // Euler-Lagrange consistency samples
  int homogeneity_states = 100;  // per component
  int conservation_starts = 8;   // per component set
  int conservation_steps = 10000;
  double dt = 1e-3;
  int gate_points = 1000000;
  int jobs = 1;

  void validate() const;
};

// Relative drift of the total energy over an unforced energized RK4 rollout.
PropertyResult check_energy_conservation(const ComponentSet& set, const InvariantSuiteConfig& cfg);
// |qd^T f_f| / (|qd| |M pi + xi|) at sampled root states.
PropertyResult check_zero_work_bending(const ComponentSet& set, const InvariantSuiteConfig& cfg);
// Idempotence, qd^T P_e = 0 and P_e = M R_p on random SPD metrics.
PropertyResult check_projection_identities(const InvariantSuiteConfig& cfg);
// Pulling an energized geometry against energizing the pulled geometry.
PropertyResult check_pull_energize_commutation(const InvariantSuiteConfig& cfg);
// Pulled Euler-Lagrange spec against differentiating the pulled energy.
PropertyResult check_pull_euler_lagrange(const InvariantSuiteConfig& cfg);
// Tensor-form Finsler equations of motion against differentiating the energy.
PropertyResult check_explicit_finsler(const InvariantSuiteConfig& cfg);
// Geometry HD2, metric HD0 and energy HD2 over every attached component.
std::vector<PropertyResult> check_homogeneity(const ComponentSet& set,
                                              const InvariantSuiteConfig& cfg);
// Nonnegativity, HD2 and PSD metric of every attached energy.
PropertyResult check_finsler_energies(const ComponentSet& set, const InvariantSuiteConfig& cfg);
// Acceleration covariance under a random linear change of coordinates.
PropertyResult check_reparameterization(const ComponentSet& set, const InvariantSuiteConfig& cfg);
// s_beta and eta stay in [0, 1] over a dense sweep of their arguments.
PropertyResult check_gate_ranges(const InvariantSuiteConfig& cfg);

std::vector<PropertyResult> run_invariant_suite(const InvariantSuiteConfig& cfg);

}  // namespace fabrica
