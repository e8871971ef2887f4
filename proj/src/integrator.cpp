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

#include "fabrica/integrator.hpp"

namespace fabrica {

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::kEuler;
  if (name == "rk4") return Scheme::kRK4;
  throw ConfigError("unknown integrator '" + name + "' (expected euler or rk4)");
}

std::string scheme_name(Scheme s) { return s == Scheme::kEuler ? "euler" : "rk4"; }

void Integrator::validate() const {
  if (!(dt > 0.0)) throw PreconditionError("integrator dt must be positive");
}

namespace {

Vec checked(const Policy& policy, const State& s) {
  Vec a = policy(s);
  if (a.size() != s.qd.size()) throw StructuralError("policy returned wrong dimension");
  if (!a.allFinite()) throw DomainError("policy returned a non-finite acceleration");
  return a;
}

}  // namespace

State step(const Policy& policy, const State& s, const Integrator& in) {
  const double h = in.dt;
  if (in.scheme == Scheme::kEuler) {
    const Vec a = checked(policy, s);
    return State(s.q + h * s.qd, s.qd + h * a);
  }
  const Vec a1 = checked(policy, s);
  const State s2(s.q + 0.5 * h * s.qd, s.qd + 0.5 * h * a1);
  const Vec a2 = checked(policy, s2);
  const State s3(s.q + 0.5 * h * s2.qd, s.qd + 0.5 * h * a2);
  const Vec a3 = checked(policy, s3);
  const State s4(s.q + h * s3.qd, s.qd + h * a3);
  const Vec a4 = checked(policy, s4);
  return State(s.q + h / 6.0 * (s.qd + 2.0 * s2.qd + 2.0 * s3.qd + s4.qd),
               s.qd + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4));
}

}  // namespace fabrica
