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

#include <vector>

#include "fabrica/core.hpp"

namespace fabrica {

using Path = std::vector<Vec>;

// Resamples a polyline at a fixed arc-length spacing, keeping both ends.
Path resample_path(const Path& path, double spacing);

// Symmetric Hausdorff distance between two polylines, measured from the
// vertices of each to the segments of the other.
double hausdorff_distance(const Path& a, const Path& b);

// Point-set Hausdorff distance between vertex sets.
double discrete_hausdorff(const Path& a, const Path& b);

// |P_par dpsi| with P_par = I - J^T (J M^-1 J^T)^-1 J M^-1 for the rows of
// active constraints. An empty J gives |dpsi|.
double projected_gradient_norm(const Mat& M, const Mat& J_active, const Vec& dpsi);

}  // namespace fabrica
