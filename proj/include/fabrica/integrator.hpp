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
#include <string>

#include "fabrica/core.hpp"

namespace fabrica {

enum class Scheme { kEuler, kRK4 };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct Integrator {
  Scheme scheme = Scheme::kRK4;
  double dt = 1e-3;

  void validate() const;
};

using Policy = std::function<Vec(const State&)>;

// Euler: q+ = q + dt qd, qd+ = qd + dt qdd. RK4 on the first-order system.
// Throws DomainError on a non-finite acceleration.
State step(const Policy& policy, const State& state, const Integrator& integrator);

}  // namespace fabrica
