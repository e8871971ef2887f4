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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fabrica/core.hpp"
#include "fabrica/energize.hpp"
#include "fabrica/lagrangian.hpp"

namespace fabrica {

// x = phi(q) with Jacobian J(q) and curvature term Jdot(q, qd) * qd.
struct TaskMap {
  std::string name;
  int in_dim = 0;
  int out_dim = 0;
  std::function<Vec(const Vec& q)> phi;
  std::function<Mat(const Vec& q)> jacobian;
  std::function<Vec(const Vec& q, const Vec& qd)> curvature;

  // Validates shapes at q and returns (x, xd).
  State push(const State& s) const;
};

TaskMap identity_map(int dim);
// x = A q + b
TaskMap linear_map(const Mat& A, const Vec& b = Vec());
// outer(inner(q))
TaskMap compose(const TaskMap& outer, const TaskMap& inner);
// Jacobian and curvature by central differences of phi.
TaskMap finite_difference_map(std::string name, int in_dim, int out_dim,
                              std::function<Vec(const Vec&)> phi, double h = 1e-5);

// (J^T M J, J^T (f + M Jdot qd)); spec lives at the image of state.
Spec pull_spec(const TaskMap& map, const Spec& spec, const State& state);
// The same with precomputed J and Jdot qd.
Spec pull_spec(const Mat& J, const Vec& Jdqd, const Spec& spec);

// q -> L(phi(q), J qd). Analytic derivatives are the pullback of the
// codomain energy's derivatives.
EnergyFunction pull_energy(const TaskMap& map, const EnergyFunction& L);

// Energy spec and force pulled with the curvature term, potential gradient
// pulled as J^T dpsi, scalar values unchanged.
FabricComponent pull_component(const TaskMap& map, const FabricComponent& comp,
                               const State& state);
FabricComponent pull_component(const Mat& J, const Vec& Jdqd, const FabricComponent& comp);

struct Potential {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

// A component as attached to a tree node. Without a geometry the force is
// the energy's own xi (an unbent system); with one it is -M pi.
struct ComponentDef {
  std::string name;
  std::optional<EnergyFunction> energy;
  std::optional<GeometryPolicy> geometry;
  std::optional<Potential> potential;
  DiffStrategy strategy = DiffStrategy::analytic();

  FabricComponent evaluate(const State& x) const;
  int dim_hint() const;
};

struct TreeNode;

struct TreeEdge {
  TaskMap map;
  std::shared_ptr<const TreeNode> child;
};

struct Attachment {
  Weight weight;
  ComponentDef component;
};

struct TreeNode {
  std::string name;
  int dim = 0;
  std::vector<Attachment> attached;
  std::vector<TreeEdge> children;

  // Throws StructuralError on shape or cycle problems.
  void validate() const;
  bool empty() const;
};

using TreePtr = std::shared_ptr<const TreeNode>;

struct TransformTree {
  TreePtr root;
  int dim() const { return root ? root->dim : 0; }
};

// Depth-first pull and weighted sum of every attached component.
FabricComponent tree_evaluate(const TreeNode& node, const State& state);
FabricComponent tree_evaluate(const TransformTree& tree, const State& state);

// Sum of pulled energies as one energy function on the root.
EnergyFunction tree_energy(const TransformTree& tree);

struct RootEvaluation {
  FabricComponent component;  // (M~, xi~), f~, dpsi~
  Vec pi;                     // -M~^-1 f~
  double alpha = 0.0;         // energization coefficient of the summed energy
  Vec accel;                  // pi + alpha qd
};

RootEvaluation evaluate_root(const TransformTree& tree, const State& state,
                             double eps_M = kMetricRegularization,
                             double eps_v = kVelocityFloor);

// The energized root fabric with the pulled total energy and root geometry.
EnergizedFabric root_fabric(const TransformTree& tree, double eps_M = kMetricRegularization,
                            double eps_v = kVelocityFloor);

struct ReparameterizationReport {
  double max_abs_error = 0.0;
  double condition = 0.0;
  Vec accel_transported;
  Vec accel_reparameterized;
};

// Wraps tree under a new root with map change_of_coords: Q' -> Q and compares
// accelerations at the new-coordinate state.
ReparameterizationReport reparameterize_check(const TransformTree& tree,
                                              const TaskMap& change_of_coords,
                                              const State& state_new);

}  // namespace fabrica
