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

#include "fabrica/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fabrica/errors.hpp"

namespace fabrica {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Range {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const {
    if (!std::isfinite(v)) return false;
    if (lo_open ? !(v > lo) : !(v >= lo)) return false;
    if (hi_open ? !(v < hi) : !(v <= hi)) return false;
    return true;
  }
  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << (lo_open || std::isinf(lo) ? "(" : "[");
    if (std::isinf(lo)) os << "-inf"; else os << lo;
    os << ", ";
    if (std::isinf(hi)) os << "inf"; else os << hi;
    os << (hi_open || std::isinf(hi) ? ")" : "]");
    return os.str();
  }
};

Range any() { return {}; }
Range positive() { return {0.0, kInf, true, false}; }
Range nonnegative() { return {0.0, kInf, false, false}; }
Range unit() { return {0.0, 1.0, false, false}; }
Range half_open_unit() { return {0.0, 1.0, true, false}; }

template <class E>
struct Choices {
  std::vector<E> values;
  std::function<std::string(E)> name;
};

const Choices<ExperimentKind>& kinds() {
  static const Choices<ExperimentKind> c{
      {ExperimentKind::kParticles, ExperimentKind::kArmWall, ExperimentKind::kArmConstraint,
       ExperimentKind::kInvariants, ExperimentKind::kEnergizeDemo},
      kind_name};
  return c;
}

const Choices<Scheme>& schemes() {
  static const Choices<Scheme> c{{Scheme::kEuler, Scheme::kRK4}, scheme_name};
  return c;
}

const Choices<ParticleVariant>& particle_variants() {
  static const Choices<ParticleVariant> c{all_particle_variants(), variant_name};
  return c;
}

const Choices<ArmVariant>& arm_variants() {
  static const Choices<ArmVariant> c{{ArmVariant::kFabric, ArmVariant::kBaseline},
                                     arm_variant_name};
  return c;
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Reads fields out of a JSON object, recording every problem with its path.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  void number(const std::string& key, double& v, Range r) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_number()) return fail(key, "expected a number");
    const double d = x->get<double>();
    if (!r.contains(d)) return fail(key, "value " + repr(d) + " outside " + r.describe());
    v = d;
  }

  void integer(const std::string& key, int& v, int lo, int hi) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_number_integer()) return fail(key, "expected an integer");
    const auto i = x->get<long long>();
    if (i < lo || i > hi) {
      return fail(key, "value " + std::to_string(i) + " outside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    }
    v = static_cast<int>(i);
  }

  void unsigned64(const std::string& key, std::uint64_t& v) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_number_unsigned()) return fail(key, "expected a nonnegative integer");
    v = x->get<std::uint64_t>();
  }

  void flag(const std::string& key, bool& v) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_boolean()) return fail(key, "expected true or false");
    v = x->get<bool>();
  }

  void text(const std::string& key, std::string& v) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_string() || x->get<std::string>().empty()) {
      return fail(key, "expected a nonempty string");
    }
    v = x->get<std::string>();
  }

  // size < 0 accepts any length, min_size bounds it below.
  void vector(const std::string& key, Vec& v, int size, Range r, int min_size = 0) {
    const json* x = get(key);
    if (!x) return;
    std::vector<double> out;
    if (!read_numbers(key, *x, out, r)) return;
    const int n = static_cast<int>(out.size());
    if (size >= 0 && n != size) {
      return fail(key, "expected " + std::to_string(size) + " entries, got " + std::to_string(n));
    }
    if (n < min_size) return fail(key, "expected at least " + std::to_string(min_size) + " entries");
    v = Vec::Map(out.data(), n);
  }

  void numbers(const std::string& key, std::vector<double>& v, Range r, int min_size) {
    const json* x = get(key);
    if (!x) return;
    std::vector<double> out;
    if (!read_numbers(key, *x, out, r)) return;
    if (static_cast<int>(out.size()) < min_size) {
      return fail(key, "expected at least " + std::to_string(min_size) + " entries");
    }
    v = std::move(out);
  }

  void points(const std::string& key, std::vector<Vec>& v, int dim) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_array()) return fail(key, "expected an array of points");
    std::vector<Vec> out;
    for (std::size_t i = 0; i < x->size(); ++i) {
      const std::string k = key + "[" + std::to_string(i) + "]";
      std::vector<double> p;
      if (!read_numbers(k, (*x)[i], p, any())) return;
      if (static_cast<int>(p.size()) != dim) {
        return fail(k, "expected " + std::to_string(dim) + " coordinates");
      }
      out.push_back(Vec::Map(p.data(), dim));
    }
    v = std::move(out);
  }

  void pairs(const std::string& key, std::vector<std::pair<double, double>>& v) {
    std::vector<Vec> pts;
    const std::size_t before = errors_.size();
    points(key, pts, 2);
    if (errors_.size() != before || !has(key)) return;
    v.clear();
    for (const auto& p : pts) v.emplace_back(p(0), p(1));
  }

  template <class E>
  void choice(const std::string& key, E& v, const Choices<E>& c) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_string()) return fail(key, "expected one of " + allowed(c));
    if (!lookup(x->get<std::string>(), v, c)) {
      fail(key, "unknown value '" + x->get<std::string>() + "', expected one of " + allowed(c));
    }
  }

  template <class E>
  void choices(const std::string& key, std::vector<E>& v, const Choices<E>& c) {
    const json* x = get(key);
    if (!x) return;
    if (!x->is_array() || x->empty()) return fail(key, "expected a nonempty array");
    std::vector<E> out;
    for (std::size_t i = 0; i < x->size(); ++i) {
      const std::string k = key + "[" + std::to_string(i) + "]";
      E e{};
      if (!(*x)[i].is_string() || !lookup((*x)[i].get<std::string>(), e, c)) {
        return fail(k, "expected one of " + allowed(c));
      }
      for (E prev : out) {
        if (prev == e) return fail(k, "duplicate value '" + c.name(e) + "'");
      }
      out.push_back(e);
    }
    v = std::move(out);
  }

  template <class F>
  void section(const std::string& key, F&& visit) {
    const json* x = get(key);
    if (!x) return;
    Reader sub(*x, join_path(path_, key), errors_);
    if (!x->is_object()) return;
    visit(sub);
    sub.finish();
  }

  // Runs a whole-object consistency check, reporting its message at this path.
  template <class F>
  void check(F&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      errors_.push_back((path_.empty() ? std::string("config") : path_) + ": " + e.what());
    }
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        std::string known;
        for (const auto& k : seen_keys_) known += (known.empty() ? "" : ", ") + k;
        fail(key, "unknown key (expected one of: " + known + ")");
      }
    }
  }

 private:
  const json* get(const std::string& key) {
    seen_keys_.push_back(key);
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  bool read_numbers(const std::string& key, const json& x, std::vector<double>& out, Range r) {
    if (!x.is_array()) {
      fail(key, "expected an array of numbers");
      return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::string k = key + "[" + std::to_string(i) + "]";
      if (!x[i].is_number()) {
        fail(k, "expected a number");
        return false;
      }
      const double d = x[i].get<double>();
      if (!r.contains(d)) {
        fail(k, "value " + repr(d) + " outside " + r.describe());
        return false;
      }
      out.push_back(d);
    }
    return true;
  }

  template <class E>
  static bool lookup(const std::string& s, E& v, const Choices<E>& c) {
    for (E e : c.values) {
      if (c.name(e) == s) {
        v = e;
        return true;
      }
    }
    return false;
  }

  template <class E>
  static std::string allowed(const Choices<E>& c) {
    std::string s;
    for (E e : c.values) s += (s.empty() ? "" : ", ") + c.name(e);
    return s;
  }

  static std::string repr(double d) {
    std::ostringstream os;
    os.precision(17);
    os << d;
    return os.str();
  }

  void fail(const std::string& key, const std::string& msg) {
    errors_.push_back(join_path(path_, key) + ": " + msg);
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
  std::vector<std::string> seen_keys_;
};

class Writer {
 public:
  json out = json::object();

  void number(const std::string& key, double& v, Range) { out[key] = v; }
  void integer(const std::string& key, int& v, int, int) { out[key] = v; }
  void unsigned64(const std::string& key, std::uint64_t& v) { out[key] = v; }
  void flag(const std::string& key, bool& v) { out[key] = v; }
  void text(const std::string& key, std::string& v) { out[key] = v; }
  void vector(const std::string& key, Vec& v, int, Range, int = 0) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    out[key] = a;
  }
  void numbers(const std::string& key, std::vector<double>& v, Range, int) { out[key] = v; }
  void points(const std::string& key, std::vector<Vec>& v, int) {
    json a = json::array();
    for (const auto& p : v) a.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    out[key] = a;
  }
  void pairs(const std::string& key, std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (const auto& [lo, hi] : v) a.push_back({lo, hi});
    out[key] = a;
  }
  template <class E>
  void choice(const std::string& key, E& v, const Choices<E>& c) {
    out[key] = c.name(v);
  }
  template <class E>
  void choices(const std::string& key, std::vector<E>& v, const Choices<E>& c) {
    json a = json::array();
    for (E e : v) a.push_back(c.name(e));
    out[key] = a;
  }
  template <class F>
  void section(const std::string& key, F&& visit) {
    Writer sub;
    visit(sub);
    out[key] = sub.out;
  }
  template <class F>
  void check(F&&) {}
};

class SchemaWriter {
 public:
  json properties = json::object();

  json object() const {
    return {{"type", "object"}, {"properties", properties}, {"additionalProperties", false}};
  }

  void number(const std::string& key, double& v, Range r) {
    json s = {{"type", "number"}, {"default", v}};
    bounds(s, r);
    properties[key] = s;
  }
  void integer(const std::string& key, int& v, int lo, int hi) {
    properties[key] = {{"type", "integer"}, {"default", v}, {"minimum", lo}, {"maximum", hi}};
  }
  void unsigned64(const std::string& key, std::uint64_t& v) {
    properties[key] = {{"type", "integer"}, {"default", v}, {"minimum", 0}};
  }
  void flag(const std::string& key, bool& v) {
    properties[key] = {{"type", "boolean"}, {"default", v}};
  }
  void text(const std::string& key, std::string& v) {
    properties[key] = {{"type", "string"}, {"default", v}, {"minLength", 1}};
  }
  void vector(const std::string& key, Vec& v, int size, Range r, int min_size = 0) {
    json item = {{"type", "number"}};
    bounds(item, r);
    json s = {{"type", "array"}, {"items", item}};
    if (size >= 0) {
      s["minItems"] = size;
      s["maxItems"] = size;
    } else if (min_size > 0) {
      s["minItems"] = min_size;
    }
    Writer w;
    w.vector("v", v, size, r);
    s["default"] = w.out["v"];
    properties[key] = s;
  }
  void numbers(const std::string& key, std::vector<double>& v, Range r, int min_size) {
    json item = {{"type", "number"}};
    bounds(item, r);
    properties[key] = {{"type", "array"}, {"items", item}, {"minItems", min_size}, {"default", v}};
  }
  void points(const std::string& key, std::vector<Vec>& v, int dim) {
    Writer w;
    w.points("v", v, dim);
    properties[key] = {{"type", "array"},
                       {"items", {{"type", "array"},
                                  {"items", {{"type", "number"}}},
                                  {"minItems", dim},
                                  {"maxItems", dim}}},
                       {"default", w.out["v"]}};
  }
  void pairs(const std::string& key, std::vector<std::pair<double, double>>& v) {
    Writer w;
    w.pairs("v", v);
    properties[key] = {{"type", "array"},
                       {"items", {{"type", "array"},
                                  {"items", {{"type", "number"}}},
                                  {"minItems", 2},
                                  {"maxItems", 2}}},
                       {"default", w.out["v"]}};
  }
  template <class E>
  void choice(const std::string& key, E& v, const Choices<E>& c) {
    properties[key] = {{"enum", names(c)}, {"default", c.name(v)}};
  }
  template <class E>
  void choices(const std::string& key, std::vector<E>& v, const Choices<E>& c) {
    Writer w;
    w.choices("v", v, c);
    properties[key] = {{"type", "array"},
                       {"items", {{"enum", names(c)}}},
                       {"minItems", 1},
                       {"uniqueItems", true},
                       {"default", w.out["v"]}};
  }
  template <class F>
  void section(const std::string& key, F&& visit) {
    SchemaWriter sub;
    visit(sub);
    properties[key] = sub.object();
  }
  template <class F>
  void check(F&&) {}

 private:
  static void bounds(json& s, Range r) {
    if (std::isfinite(r.lo)) s[r.lo_open ? "exclusiveMinimum" : "minimum"] = r.lo;
    if (std::isfinite(r.hi)) s[r.hi_open ? "exclusiveMaximum" : "maximum"] = r.hi;
  }
  template <class E>
  static json names(const Choices<E>& c) {
    json a = json::array();
    for (E e : c.values) a.push_back(c.name(e));
    return a;
  }
};

constexpr int kMaxCount = 100000000;

template <class V>
void visit(V& v, Integrator& x) {
  v.choice("scheme", x.scheme, schemes());
  v.number("dt", x.dt, positive());
}

template <class V>
void visit(V& v, RolloutOptions& x) {
  v.number("t_max", x.t_max, positive());
  v.number("converge_tol", x.converge_tol, positive());
  v.number("settle_speed", x.settle_speed, positive());
  v.number("settle_time", x.settle_time, nonnegative());
  v.integer("record_stride", x.record_stride, 1, kMaxCount);
  v.flag("stop_on_converge", x.stop_on_converge);
  v.flag("stop_on_settle", x.stop_on_settle);
  v.number("gate_engaged", x.gate_engaged, unit());
  v.number("band", x.band, half_open_unit());
  v.number("stationary_gradient", x.stationary_gradient, nonnegative());
}

template <class V>
void visit(V& v, SpeedParams& x) {
  v.number("alpha_eta", x.alpha_eta, positive());
  v.number("alpha_shift", x.alpha_shift, any());
  v.number("B", x.B, nonnegative());
  v.number("B_floor", x.B_floor, nonnegative());
  v.number("alpha_beta", x.alpha_beta, positive());
  v.number("r", x.r, positive());
  v.number("boost_gain", x.boost_gain, nonnegative());
  v.number("eps", x.eps, positive());
  v.flag("eta_blend_enabled", x.eta_blend_enabled);
  v.number("stall_fraction", x.stall_fraction, {0.0, 1.0, false, true});
  v.check([&] {
    if (x.B < x.B_floor) throw ConfigError("B must be at least B_floor");
  });
}

template <class V>
void visit(V& v, PointAttractionParams& x) {
  v.number("m_upper", x.m_upper, positive());
  v.number("m_lower", x.m_lower, positive());
  v.number("alpha_m", x.alpha_m, positive());
  v.number("k", x.k, positive());
  v.number("alpha_psi", x.alpha_psi, positive());
  v.number("geometry_gain", x.geometry_gain, nonnegative());
  v.check([&] { x.validate(); });
}

template <class V>
void visit(V& v, ParticleWorld& x) {
  v.vector("obstacle_center", x.obstacle_center, 2, any());
  v.number("obstacle_radius", x.obstacle_radius, positive());
  v.vector("target", x.target, 2, any());
  v.points("starts", x.starts, 2);
  v.check([&] {
    if (x.starts.empty()) throw ConfigError("at least one start is required");
    x.validate();
  });
}

template <class V>
void visit(V& v, ParticleParams& x) {
  v.section("attraction", [&](auto& s) { visit(s, x.attraction); });
  v.number("k_b", x.k_b, positive());
  v.number("alpha_b", x.alpha_b, positive());
  v.section("speed", [&](auto& s) { visit(s, x.speed); });
  v.section("rollout", [&](auto& s) { visit(s, x.rollout); });
  v.number("active_distance", x.active_distance, nonnegative());
}

template <class V>
void visit(V& v, ParticleExperiment& x) {
  v.section("world", [&](auto& s) { visit(s, x.world); });
  v.section("params", [&](auto& s) { visit(s, x.params); });
  v.choices("variants", x.variants, particle_variants());
  v.numbers("speeds", x.speeds, positive(), 1);
}

template <class V>
void visit(V& v, PlanarArm& x) {
  v.numbers("link_lengths", x.link_lengths, positive(), 1);
  v.pairs("joint_limits", x.joint_limits);
  v.numbers("body_fractions", x.body_fractions, half_open_unit(), 0);
  v.check([&] { x.validate(); });
}

template <class V>
void visit(V& v, ArmScene& x, bool with_wall) {
  v.section("arm", [&](auto& s) { visit(s, x.arm); });
  if (with_wall) v.number("wall_x", x.wall_x, any());
  v.vector("q0", x.q0, -1, any(), 1);
  v.check([&] {
    if (x.q0.size() != x.arm.dof()) throw ConfigError("q0 needs one angle per joint");
    for (int j = 0; j < x.arm.dof(); ++j) {
      const auto [lo, hi] = x.arm.joint_limits[j];
      if (!(x.q0(j) > lo && x.q0(j) < hi)) throw ConfigError("q0 must lie inside the joint limits");
    }
    if (with_wall && !(arm_wall_clearance(x, x.q0) > 0.0)) {
      throw ConfigError("initial configuration touches the wall");
    }
  });
}

template <class V>
void visit(V& v, DistanceRepulsionParams& x) {
  v.number("k", x.k, positive());
  v.number("k_b", x.k_b, nonnegative());
  v.number("k_r", x.k_r, nonnegative());
  v.number("alpha", x.alpha, positive());
  v.number("x_o", x.x_o, nonnegative());
  v.number("k_b_potential", x.k_b_potential, nonnegative());
}

template <class V>
void visit(V& v, ArmFabricParams& x) {
  v.section("posture", [&](auto& s) {
    s.number("m", x.posture.m, positive());
    s.number("k", x.posture.k, nonnegative());
    s.number("alpha", x.posture.alpha, positive());
  });
  v.vector("posture_target", x.posture_target, -1, any());
  v.section("limit", [&](auto& s) { visit(s, x.limit); });
  v.section("wall", [&](auto& s) { visit(s, x.wall); });
  v.section("ee", [&](auto& s) {
    s.number("m_upper", x.ee.m_upper, positive());
    s.number("m_lower", x.ee.m_lower, positive());
    s.number("alpha_m", x.ee.alpha_m, positive());
    s.number("k", x.ee.k, positive());
    s.number("alpha", x.ee.alpha, positive());
    s.check([&] {
      if (x.ee.m_upper < x.ee.m_lower) throw ConfigError("m_upper must be at least m_lower");
    });
  });
  v.number("geometry_ratio", x.geometry_ratio, positive());
  v.number("baseline_potential_scale", x.baseline_potential_scale, positive());
  v.number("baseline_posture_scale", x.baseline_posture_scale, nonnegative());
  v.section("speed", [&](auto& s) {
    s.number("target_speed", x.speed.target_speed, positive());
    s.number("alpha_eta", x.speed.alpha_eta, positive());
    s.number("B", x.speed.B, nonnegative());
    s.number("B_floor", x.speed.B_floor, nonnegative());
    s.number("alpha_beta", x.speed.alpha_beta, positive());
    s.number("r", x.speed.r, positive());
    s.number("boost_gain", x.speed.boost_gain, nonnegative());
    s.check([&] {
      if (x.speed.B < x.speed.B_floor) throw ConfigError("B must be at least B_floor");
    });
  });
  v.number("active_distance", x.active_distance, nonnegative());
}

template <class V>
void visit(V& v, WallSchedule& x) {
  v.number("start_twd", x.start_twd, any());
  v.number("end_twd", x.end_twd, any());
  v.number("step", x.step, positive());
  v.number("target_y", x.target_y, any());
  v.number("hold_time", x.hold_time, positive());
  v.check([&] {
    if (!(x.end_twd <= x.start_twd)) throw ConfigError("end_twd must not exceed start_twd");
  });
}

template <class V>
void visit(V& v, ArmWallExperiment& x) {
  v.section("scene", [&](auto& s) { visit(s, x.scene, true); });
  v.section("params", [&](auto& s) { visit(s, x.params); });
  v.section("schedule", [&](auto& s) { visit(s, x.schedule); });
  v.choices("variants", x.variants, arm_variants());
  v.section("rollout", [&](auto& s) { visit(s, x.rollout); });
  v.check([&] {
    if (!x.params.posture_target.size()) return;
    if (x.params.posture_target.size() != x.scene.arm.dof()) {
      throw ConfigError("params.posture_target needs one angle per joint");
    }
  });
}

template <class V>
void visit(V& v, ConstraintExperiment& x) {
  v.section("scene", [&](auto& s) { visit(s, x.scene, false); });
  v.section("params", [&](auto& s) { visit(s, x.params); });
  v.section("line", [&](auto& s) {
    s.vector("normal", x.line.normal, 2, any());
    s.number("offset", x.line.offset, any());
    s.check([&] {
      if (std::abs(x.line.normal.norm() - 1.0) > 1e-9) throw ConfigError("normal must be a unit vector");
    });
  });
  v.vector("target", x.target, 2, any());
  v.section("solver", [&](auto& s) {
    s.number("dt", x.solver.dt, positive());
    s.number("lambda", x.solver.lambda, nonnegative());
    s.integer("gn_iterations", x.solver.gn_iterations, 1, 1000);
  });
  v.number("t_max", x.t_max, positive());
  v.number("settle_speed", x.settle_speed, positive());
  v.number("settle_time", x.settle_time, nonnegative());
  v.number("stationary_gradient", x.stationary_gradient, nonnegative());
  v.number("compare_time", x.compare_time, positive());
  v.number("feasibility_tol", x.feasibility_tol, positive());
}

template <class V>
void visit(V& v, InvariantSuiteConfig& x) {
  v.integer("states", x.states, 1, kMaxCount);
  v.integer("tuples", x.tuples, 1, kMaxCount);
  v.integer("derivative_states", x.derivative_states, 1, kMaxCount);
  v.integer("homogeneity_states", x.homogeneity_states, 1, kMaxCount);
  v.integer("conservation_starts", x.conservation_starts, 1, kMaxCount);
  v.integer("conservation_steps", x.conservation_steps, 1, kMaxCount);
  v.integer("gate_points", x.gate_points, 2, kMaxCount);
}

template <class V>
void visit(V& v, EnergizeDemo& x) {
  v.vector("qd", x.qd, -1, any(), 1);
  v.vector("pi", x.pi, -1, any(), 1);
  v.check([&] {
    if (x.qd.size() != x.pi.size()) throw ConfigError("qd and pi must have the same length");
  });
}

// every_section is set for the schema, which describes all sections at once.
template <class V>
void visit_root(V& v, ExperimentConfig& c, bool every_section) {
  v.choice("kind", c.kind, kinds());
  v.unsigned64("seed", c.seed);
  v.integer("jobs", c.jobs, 1, 1024);
  v.section("integrator", [&](auto& s) { visit(s, c.integrator); });
  v.text("output_dir", c.output_dir);
  const auto want = [&](ExperimentKind k) { return every_section || c.kind == k; };
  if (want(ExperimentKind::kParticles)) {
    v.section("particles", [&](auto& s) { visit(s, c.particles); });
  }
  if (want(ExperimentKind::kArmWall)) {
    v.section("arm_wall", [&](auto& s) { visit(s, c.arm_wall); });
  }
  if (want(ExperimentKind::kArmConstraint)) {
    v.section("arm_constraint", [&](auto& s) { visit(s, c.arm_constraint); });
  }
  if (want(ExperimentKind::kInvariants)) {
    v.section("invariants", [&](auto& s) { visit(s, c.invariants); });
  }
  if (want(ExperimentKind::kEnergizeDemo)) {
    v.section("energize_demo", [&](auto& s) { visit(s, c.energize_demo); });
  }
}

}  // namespace

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kParticles: return "particles";
    case ExperimentKind::kArmWall: return "arm_wall";
    case ExperimentKind::kArmConstraint: return "arm_constraint";
    case ExperimentKind::kInvariants: return "invariants";
    case ExperimentKind::kEnergizeDemo: return "energize_demo";
  }
  return "unknown";
}

void ExperimentConfig::propagate() {
  particles.params.rollout.integrator = integrator;
  arm_wall.rollout.integrator = integrator;
  arm_constraint.compare_dt = integrator.dt;
  invariants.dt = integrator.dt;
  invariants.seed = seed;
  invariants.jobs = jobs;
}

ConstraintExperiment default_constraint_experiment() {
  ConstraintExperiment e;
  e.scene.q0 = Vec(3);
  e.scene.q0 << 0.0, 1.0, 1.0;
  e.scene.wall_x = kInf;
  e.line.normal = Vec(2);
  e.line.normal << 0.0, 1.0;
  e.line.offset = 0.4;
  e.target = Vec(2);
  e.target << 0.6, 0.7;
  return e;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.arm_wall.scene.q0 = Vec(3);
  c.arm_wall.scene.q0 << 0.0, 1.0, 1.0;
  c.arm_constraint = default_constraint_experiment();
  c.energize_demo.qd = Vec(2);
  c.energize_demo.qd << 1.0, 0.0;
  c.energize_demo.pi = Vec(2);
  c.energize_demo.pi << 2.0, 3.0;
  c.propagate();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw ConfigError("syntax error: " + (pos == std::string::npos ? what : what.substr(pos)));
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("kind")) throw ConfigError("kind: required field missing");

  std::vector<std::string> errors;
  ExperimentConfig probe;
  {
    Reader r(j, "", errors);
    r.choice("kind", probe.kind, kinds());
  }
  if (!errors.empty()) throw ConfigError(errors.front());

  ExperimentConfig c = default_config(probe.kind);
  Reader r(j, "", errors);
  visit_root(r, c, false);
  r.finish();
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  c.propagate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  Writer w;
  visit_root(w, c, false);
  return w.out.dump(2) + "\n";
}

std::string config_schema() {
  ExperimentConfig c = default_config(ExperimentKind::kParticles);
  SchemaWriter w;
  visit_root(w, c, true);
  json s = w.object();
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = "fabrica experiment config";
  s["description"] =
      "Every field except kind is optional and defaults as listed. Only the section named by "
      "kind may appear. Lengths are in world units, times in seconds, angles in radians.";
  s["required"] = json::array({"kind"});
  json rules = json::array();
  for (ExperimentKind k : kinds().values) {
    json others = json::array();
    for (ExperimentKind o : kinds().values) {
      if (o != k) others.push_back({{"required", json::array({kind_name(o)})}});
    }
    rules.push_back({{"if", {{"properties", {{"kind", {{"const", kind_name(k)}}}}}}},
                     {"then", {{"not", {{"anyOf", others}}}}}});
  }
  s["allOf"] = rules;
  return s.dump(2) + "\n";
}

}  // namespace fabrica
