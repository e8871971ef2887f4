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

#include "fabrica/transform.hpp"

#include <set>

namespace fabrica {

State TaskMap::push(const State& s) const {
  if (s.dim() != in_dim) {
    throw StructuralError("map '" + name + "' expects input dimension " +
                          std::to_string(in_dim) + ", got " + std::to_string(s.dim()));
  }
  const Mat J = jacobian(s.q);
  if (J.rows() != out_dim || J.cols() != in_dim) {
    throw StructuralError("map '" + name + "' jacobian has wrong shape");
  }
  return State(phi(s.q), J * s.qd);
}

TaskMap identity_map(int dim) {
  TaskMap m;
  m.name = "identity";
  m.in_dim = m.out_dim = dim;
  m.phi = [](const Vec& q) { return q; };
  m.jacobian = [dim](const Vec&) { return Mat::Identity(dim, dim); };
  m.curvature = [dim](const Vec&, const Vec&) { return Vec::Zero(dim); };
  return m;
}

TaskMap linear_map(const Mat& A, const Vec& b) {
  const Vec offset = b.size() == 0 ? Vec::Zero(A.rows()) : b;
  if (offset.size() != A.rows()) throw StructuralError("linear_map offset shape mismatch");
  TaskMap m;
  m.name = "linear";
  m.in_dim = static_cast<int>(A.cols());
  m.out_dim = static_cast<int>(A.rows());
  m.phi = [A, offset](const Vec& q) { return Vec(A * q + offset); };
  m.jacobian = [A](const Vec&) { return A; };
  const int n = m.out_dim;
  m.curvature = [n](const Vec&, const Vec&) { return Vec::Zero(n); };
  return m;
}

TaskMap compose(const TaskMap& outer, const TaskMap& inner) {
  if (inner.out_dim != outer.in_dim) {
    throw StructuralError("compose: '" + inner.name + "' output does not match '" +
                          outer.name + "' input");
  }
  TaskMap m;
  m.name = outer.name + "*" + inner.name;
  m.in_dim = inner.in_dim;
  m.out_dim = outer.out_dim;
  m.phi = [outer, inner](const Vec& q) { return outer.phi(inner.phi(q)); };
  m.jacobian = [outer, inner](const Vec& q) {
    return Mat(outer.jacobian(inner.phi(q)) * inner.jacobian(q));
  };
  m.curvature = [outer, inner](const Vec& q, const Vec& qd) {
    const Vec y = inner.phi(q);
    const Vec yd = inner.jacobian(q) * qd;
    return Vec(outer.jacobian(y) * inner.curvature(q, qd) + outer.curvature(y, yd));
  };
  return m;
}

TaskMap finite_difference_map(std::string name, int in_dim, int out_dim,
                              std::function<Vec(const Vec&)> phi, double h) {
  TaskMap m;
  m.name = std::move(name);
  m.in_dim = in_dim;
  m.out_dim = out_dim;
  m.phi = phi;
  auto jac = [phi, in_dim, out_dim, h](const Vec& q) {
    Mat J(out_dim, in_dim);
    for (int i = 0; i < in_dim; ++i) {
      const Vec e = h * Vec::Unit(in_dim, i);
      J.col(i) = (phi(q + e) - phi(q - e)) / (2.0 * h);
    }
    return J;
  };
  m.jacobian = jac;
  m.curvature = [phi, h](const Vec& q, const Vec& qd) {
    // d2/dt2 phi(q + t qd) at t = 0.
    return Vec((phi(q + h * qd) - 2.0 * phi(q) + phi(q - h * qd)) / (h * h));
  };
  return m;
}

Spec pull_spec(const Mat& J, const Vec& Jdqd, const Spec& spec) {
  spec.validate();
  if (J.rows() != spec.dim() || Jdqd.size() != spec.dim()) {
    throw StructuralError("pull_spec: spec dimension " + std::to_string(spec.dim()) +
                          " does not match map output " + std::to_string(J.rows()));
  }
  const Mat MJ = spec.M * J;
  return Spec{symmetrized(J.transpose() * MJ), J.transpose() * (spec.f + spec.M * Jdqd)};
}

Spec pull_spec(const TaskMap& map, const Spec& spec, const State& state) {
  if (state.dim() != map.in_dim) throw StructuralError("pull_spec: state/map shape mismatch");
  return pull_spec(map.jacobian(state.q), map.curvature(state.q, state.qd), spec);
}

EnergyFunction pull_energy(const TaskMap& map, const EnergyFunction& L) {
  EnergyFunction out;
  out.name = L.name + "@" + map.name;
  out.dim = map.in_dim;
  out.homogeneity_degree = L.homogeneity_degree;
  out.eval = [map, L](const Vec& q, const Vec& qd, const Vec& gate) {
    const Mat J = map.jacobian(q);
    return L.eval(map.phi(q), J * qd, J * gate);
  };
  if (L.has_analytic()) {
    out.analytic = [map, L](const Vec& q, const Vec& qd) {
      const Mat J = map.jacobian(q);
      const Spec s = L.analytic(map.phi(q), J * qd);
      return pull_spec(J, map.curvature(q, qd), s);
    };
  }
  return out;
}

FabricComponent pull_component(const Mat& J, const Vec& Jdqd, const FabricComponent& comp) {
  FabricComponent out;
  out.energy = pull_spec(J, Jdqd, comp.energy);
  const Vec MJd = comp.energy.M * Jdqd;
  out.force = J.transpose() * (comp.force + MJd);
  out.potential_gradient = J.transpose() * comp.potential_gradient;
  out.energy_value = comp.energy_value;
  out.potential_value = comp.potential_value;
  return out;
}

FabricComponent pull_component(const TaskMap& map, const FabricComponent& comp,
                               const State& state) {
  if (state.dim() != map.in_dim) throw StructuralError("pull_component: state/map mismatch");
  return pull_component(map.jacobian(state.q), map.curvature(state.q, state.qd), comp);
}

int ComponentDef::dim_hint() const {
  if (energy && energy->dim > 0) return energy->dim;
  return 0;
}

FabricComponent ComponentDef::evaluate(const State& x) const {
  const int d = x.dim();
  FabricComponent c = FabricComponent::zero(d);
  if (energy) {
    DiffStrategy s = strategy;
    if (s.mode == DiffStrategy::Mode::kAnalytic && !energy->has_analytic()) {
      s = DiffStrategy::finite_difference();
    }
    c.energy = euler_lagrange(*energy, s, x);
    c.energy_value = (*energy)(x.q, x.qd);
  }
  if (geometry) {
    if (!energy) {
      throw StructuralError("component '" + name + "' has a geometry but no energy metric");
    }
    const Vec pi = (*geometry)(x.q, x.qd);
    if (pi.size() != d) throw StructuralError("geometry '" + geometry->name + "' shape mismatch");
    c.force = -(c.energy.M * pi);
  } else {
    c.force = c.energy.f;
  }
  if (potential) {
    c.potential_gradient = potential->gradient(x.q);
    c.potential_value = potential->value(x.q);
  }
  if (!c.force.allFinite() || !c.potential_gradient.allFinite()) {
    throw DomainError("component '" + name + "' produced non-finite terms");
  }
  return c;
}

namespace {

void validate_node(const TreeNode& node, std::set<const TreeNode*>& path) {
  if (!path.insert(&node).second) throw StructuralError("cycle through node '" + node.name + "'");
  if (node.dim < 1) throw StructuralError("node '" + node.name + "' has no dimension");
  for (const auto& a : node.attached) {
    const int h = a.component.dim_hint();
    if (h != 0 && h != node.dim) {
      throw StructuralError("component '" + a.component.name + "' has dimension " +
                            std::to_string(h) + " on node '" + node.name + "' of dimension " +
                            std::to_string(node.dim));
    }
  }
  for (const auto& e : node.children) {
    if (!e.child) throw StructuralError("null child under node '" + node.name + "'");
    if (e.map.in_dim != node.dim || e.map.out_dim != e.child->dim) {
      throw StructuralError("edge map '" + e.map.name + "' does not connect '" + node.name +
                            "' to '" + e.child->name + "'");
    }
    validate_node(*e.child, path);
  }
  path.erase(&node);
}

}  // namespace

void TreeNode::validate() const {
  std::set<const TreeNode*> path;
  validate_node(*this, path);
}

bool TreeNode::empty() const {
  if (!attached.empty()) return false;
  for (const auto& e : children) {
    if (!e.child->empty()) return false;
  }
  return true;
}

FabricComponent tree_evaluate(const TreeNode& node, const State& state) {
  if (state.dim() != node.dim) {
    throw StructuralError("state dimension " + std::to_string(state.dim()) + " at node '" +
                          node.name + "' of dimension " + std::to_string(node.dim));
  }
  FabricComponent sum = FabricComponent::zero(node.dim);
  for (const auto& a : node.attached) {
    if (a.weight.value() == 0.0) continue;
    sum.add_scaled(a.weight.value(), a.component.evaluate(state));
  }
  for (const auto& e : node.children) {
    const Mat J = e.map.jacobian(state.q);
    const State child_state(e.map.phi(state.q), J * state.qd);
    const FabricComponent child = tree_evaluate(*e.child, child_state);
    sum.add_scaled(1.0, pull_component(J, e.map.curvature(state.q, state.qd), child));
  }
  return sum;
}

FabricComponent tree_evaluate(const TransformTree& tree, const State& state) {
  if (!tree.root || tree.root->empty()) throw DegenerateError("tree has no components");
  return tree_evaluate(*tree.root, state);
}

namespace {

double node_energy(const TreeNode& node, const Vec& q, const Vec& qd, const Vec& gate) {
  double sum = 0.0;
  for (const auto& a : node.attached) {
    if (a.component.energy && a.weight.value() > 0.0) {
      sum += a.weight.value() * a.component.energy->eval(q, qd, gate);
    }
  }
  for (const auto& e : node.children) {
    const Mat J = e.map.jacobian(q);
    sum += node_energy(*e.child, e.map.phi(q), J * qd, J * gate);
  }
  return sum;
}

}  // namespace

EnergyFunction tree_energy(const TransformTree& tree) {
  if (!tree.root) throw DegenerateError("tree has no root");
  EnergyFunction L;
  L.name = "tree:" + tree.root->name;
  L.dim = tree.root->dim;
  TreePtr root = tree.root;
  L.eval = [root](const Vec& q, const Vec& qd, const Vec& gate) {
    return node_energy(*root, q, qd, gate);
  };
  L.analytic = [root](const Vec& q, const Vec& qd) {
    return tree_evaluate(*root, State(q, qd)).energy;
  };
  return L;
}

RootEvaluation evaluate_root(const TransformTree& tree, const State& state, double eps_M,
                             double eps_v) {
  RootEvaluation r;
  r.component = tree_evaluate(tree, state);
  r.pi = -solve_metric(r.component.energy.M, r.component.force, eps_M);
  r.alpha = energization_coefficient(r.component.energy, r.pi, state.qd, eps_v);
  r.accel = r.pi + r.alpha * state.qd;
  return r;
}

EnergizedFabric root_fabric(const TransformTree& tree, double eps_M, double eps_v) {
  if (!tree.root || tree.root->empty()) throw DegenerateError("tree has no components");
  TreePtr root = tree.root;
  GeometryPolicy geometry;
  geometry.name = "root:" + root->name;
  geometry.eval = [root, eps_M](const Vec& q, const Vec& qd) {
    const FabricComponent c = tree_evaluate(*root, State(q, qd));
    return Vec(-solve_metric(c.energy.M, c.force, eps_M));
  };
  return energize(tree_energy(tree), geometry, eps_v);
}

ReparameterizationReport reparameterize_check(const TransformTree& tree,
                                              const TaskMap& change_of_coords,
                                              const State& state_new) {
  if (change_of_coords.in_dim != change_of_coords.out_dim ||
      change_of_coords.out_dim != tree.dim()) {
    throw StructuralError("reparameterization must be square and match the root dimension");
  }
  ReparameterizationReport rep;
  const Mat J = change_of_coords.jacobian(state_new.q);
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec sv = svd.singularValues();
  rep.condition = sv(0) / sv(sv.size() - 1);
  if (!(sv(sv.size() - 1) > 0.0) || rep.condition >= 1e8) {
    throw SingularMetricError("singular reparameterization (condition " +
                              std::to_string(rep.condition) + ")");
  }
  auto wrapped = std::make_shared<TreeNode>();
  wrapped->name = "reparameterized";
  wrapped->dim = change_of_coords.in_dim;
  wrapped->children.push_back(TreeEdge{change_of_coords, tree.root});
  const TransformTree new_tree{wrapped};

  const State old_state = change_of_coords.push(state_new);
  const Vec qdd = evaluate_root(tree, old_state).accel;
  const Vec curv = change_of_coords.curvature(state_new.q, state_new.qd);
  rep.accel_transported = J.fullPivLu().solve(qdd - curv);
  rep.accel_reparameterized = evaluate_root(new_tree, state_new).accel;
  rep.max_abs_error =
      (rep.accel_transported - rep.accel_reparameterized).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace fabrica
