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

// Planar n-link arm: kinematic task maps, the wall-approach experiment and
// the end-effector-on-a-line constrained experiment.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fabrica/components.hpp"
#include "fabrica/constraint.hpp"
#include "fabrica/sim.hpp"
#include "fabrica/transform.hpp"

namespace fabrica {

struct PlanarArm {
  std::vector<double> link_lengths;
  std::vector<std::pair<double, double>> joint_limits;
  // Fractions along each link used as collision points; 1 is the link tip.
  std::vector<double> body_fractions;

  static PlanarArm standard(int links = 3, double length = 0.4, double limit = 2.8);
  int dof() const { return static_cast<int>(link_lengths.size()); }
  double reach() const;
  void validate() const;
};

// Position of the point at `fraction` along link `link`.
TaskMap arm_point_map(const PlanarArm& arm, int link, double fraction);
TaskMap arm_ee_map(const PlanarArm& arm);
// Signed distance w - p_x of a point to the wall x = w (positive on the free side).
TaskMap wall_distance_map(const TaskMap& point, double wall_x);
// Distance to a point obstacle; gradient is the unit vector from obstacle to point.
TaskMap point_distance_map(const TaskMap& point, const Vec& center);
// x = q_j - lo when `upper` is false, hi - q_j otherwise.
TaskMap joint_limit_map(const PlanarArm& arm, int joint, bool upper);

struct ArmMaps {
  TaskMap ee;
  std::vector<TaskMap> body_points;  // every (link, fraction) pair, EE last
  std::vector<TaskMap> wall_distances;
  std::vector<TaskMap> joint_limits;  // lower and upper per joint
};

ArmMaps arm_forward_maps(const PlanarArm& arm, double wall_x);

enum class ArmVariant { kFabric, kBaseline };

std::string arm_variant_name(ArmVariant v);
ArmVariant parse_arm_variant(const std::string& name);

struct ArmSpeedParams {
  double target_speed = 0.5;  // joint-space speed |qd| for the execution energy target
  double alpha_eta = 20.0;
  double B = 5.0;
  double B_floor = 1.0;
  double alpha_beta = 20.0;
  double r = 0.1;
  double boost_gain = 0.0;
};

struct ArmFabricParams {
  JointAttractionParams posture{1.0, 1.0, 1.0};
  Vec posture_target;  // empty means the initial configuration
  DistanceRepulsionParams limit{0.1, 0.1, 0.05, 20.0, 0.05, 1e-4};
  DistanceRepulsionParams wall{0.5, 1e-2, 1.0, 20.0, 0.05, 1e-4};
  EEAttractionParams ee{2.0, 0.5, 10.0, 2.0, 10.0};
  // Geometry-to-potential ratio of the repulsion terms in the fabric variant.
  double geometry_ratio = 10.0;
  // Potential multiplier of the baseline relative to the fabric variant.
  double baseline_potential_scale = 10.0;
  // Gain multiplier of the baseline's posture potential.
  double baseline_posture_scale = 0.1;
  ArmSpeedParams speed;
  double active_distance = 0.02;  // distances below this count as active constraints
};

struct ArmScene {
  PlanarArm arm = PlanarArm::standard();
  double wall_x = 0.9;
  Vec q0;  // initial configuration
};

// Joint-space tree: posture and joint limits at the root, EE attraction and
// wall barriers on body points. A wall_x of +infinity drops the wall.
TransformTree arm_tree(const ArmScene& scene, const ArmFabricParams& params, ArmVariant variant,
                       const Vec& ee_target);

ForcedFabric arm_fabric(const ArmScene& scene, const ArmFabricParams& params, ArmVariant variant,
                        const Vec& ee_target);

double arm_wall_clearance(const ArmScene& scene, const Vec& q);

struct WallSchedule {
  double start_twd = 0.3;
  double end_twd = -0.1;
  double step = 0.025;
  double target_y = 0.3;
  double hold_time = 60.0;  // each row advances once stationary or after this long

  std::vector<double> distances() const;
};

struct WallRow {
  double twd = 0.0;
  Vec target;
  double ete = 0.0;
  double ewd = 0.0;
  double final_speed = 0.0;
  double projected_gradient = 0.0;
  double min_clearance = 0.0;
  bool penetrated = false;
};

struct WallResult {
  ArmVariant variant = ArmVariant::kFabric;
  std::vector<WallRow> rows;
  Rollout trajectory;  // all holds concatenated
};

// Rows terminate at stationarity: settled with a projected gradient below 1e-2.
RolloutOptions arm_rollout_options();

WallResult run_wall_experiment(const ArmScene& scene, const ArmFabricParams& params,
                               const WallSchedule& schedule, ArmVariant variant,
                               const RolloutOptions& options);

struct LineConstraint {
  Vec normal;  // unit normal of the line n . p = offset
  double offset = 0.0;
};

EqualityConstraint ee_line_constraint(const PlanarArm& arm, const LineConstraint& line);

struct ConstraintExperiment {
  ArmScene scene;
  ArmFabricParams params;
  LineConstraint line;
  Vec target;
  PenaltySolverConfig solver;
  double t_max = 30.0;
  double settle_speed = 1e-3;
  double settle_time = 0.5;
  // Settled runs stop once the projected potential gradient is below this.
  double stationary_gradient = 1e-2;
  // Continuous-time comparison of the multiplier and projector paths.
  double compare_time = 1.0;
  double compare_dt = 1e-3;
  double feasibility_tol = 1e-4;
};

struct ConstraintResult {
  Vec closest_feasible;
  double max_violation = 0.0;  // max |C| over the penalty rollout
  double final_distance = 0.0;  // EE distance to the closest feasible point
  double final_speed = 0.0;
  double final_projected_gradient = 0.0;
  double final_time = 0.0;
  bool settled = false;
  bool stationary = false;
  Rollout trajectory;
  double path_difference = 0.0;  // multiplier vs projector, max abs over the comparison
  double comparison_violation = 0.0;
};

ConstraintResult run_constraint_experiment(const ConstraintExperiment& exp);

// Splits the forced fabric at s into M q'' + xi + f_f + dpsi + B q' = 0.
ConstrainedTerms forced_terms(const ForcedFabric& fabric, const State& s,
                              const SpeedControlState& sc);

}  // namespace fabrica
