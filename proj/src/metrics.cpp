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

#include "fabrica/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fabrica/constraint.hpp"

namespace fabrica {

Path resample_path(const Path& path, double spacing) {
  if (path.size() < 2 || !(spacing > 0.0)) return path;
  Path out{path.front()};
  double carry = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec seg = path[i] - path[i - 1];
    const double len = seg.norm();
    double s = spacing - carry;
    while (s <= len) {
      out.push_back(path[i - 1] + (s / len) * seg);
      s += spacing;
    }
    carry = len - (s - spacing);
  }
  if ((out.back() - path.back()).norm() > 0.0) out.push_back(path.back());
  return out;
}

namespace {

double point_segment(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double l2 = ab.squaredNorm();
  double t = l2 > 0.0 ? (p - a).dot(ab) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double directed(const Path& from, const Path& to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    if (to.size() == 1) {
      best = (p - to.front()).norm();
    } else {
      for (std::size_t j = 1; j < to.size(); ++j) {
        best = std::min(best, point_segment(p, to[j - 1], to[j]));
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double directed_points(const Path& from, const Path& to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

double hausdorff_distance(const Path& a, const Path& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed(a, b), directed(b, a));
}

double discrete_hausdorff(const Path& a, const Path& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed_points(a, b), directed_points(b, a));
}

double projected_gradient_norm(const Mat& M, const Mat& J_active, const Vec& dpsi) {
  if (J_active.rows() == 0) return dpsi.norm();
  // Drop dependent rows so the projector stays defined.
  Eigen::FullPivLU<Mat> lu(J_active.transpose());
  lu.setThreshold(1e-8);
  Mat J = J_active;
  if (lu.rank() < J_active.rows()) {
    const Mat basis = lu.image(J_active.transpose());
    J = basis.transpose();
  }
  if (J.rows() >= J.cols()) return 0.0;
  return (constraint_projectors(M, J).par * dpsi).norm();
}

}  // namespace fabrica
