#pragma once

// Line-oriented scene files.
//
//   # comment
//   [surface <name>]        kind = plane | sphere | quadric | sinusoid, plus its fields
//   [system]                ambient_index, interface = <name> reflect <n> | <name> refract <n1> <n2>
//   [family]                kind = point_source | collimated | normal_congruence | two_skew_lines
//   [options]               tolerances, steps, seeds, design inputs
//
// Every line is `key = value`; vectors are whitespace-separated numbers.
// Unknown sections or keys are errors.

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/families.hpp"
#include "oline/optics.hpp"
#include "oline/surfaces.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace oline {

struct FamilySpec {
  std::string kind;
  Vec3 apex = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  Vec3 direction = Vec3::UnitZ();
  Vec3 anchor = Vec3::Zero();
  std::string surface;
  Vec3 origin = Vec3::Zero();
  Vec3 d1_point = Vec3::Zero();
  Vec3 d1_direction = Vec3::UnitX();
  Vec3 d2_point = Vec3::UnitZ();
  Vec3 d2_direction = Vec3::UnitY();
  Domain domain;
  int grid = 21;
};

struct SceneOptions {
  std::optional<double> tol;
  std::optional<double> step;
  std::uint64_t seed = 1;
  int samples = 20;
  std::optional<Vec2> k0;
  std::optional<double> wavefront_constant;
  std::optional<Vec3> focus;
  int epsilon = 1;
  std::optional<double> level;
  std::optional<Vec3> endpoint1;
  std::optional<Vec3> endpoint2;
};

struct Scene {
  std::map<std::string, ImplicitSurface> surfaces;
  std::vector<std::string> interface_names;
  OpticalSystem system;
  std::optional<FamilySpec> family;
  SceneOptions options;

  RayFamily build_family() const {
    if (!family) throw Error(ErrorCode::InvalidArgument, "scene has no [family] section");
    const FamilySpec& f = *family;
    if (f.kind == "point_source") return RayFamily::point_source(f.apex, f.axis, f.domain);
    if (f.kind == "collimated") return RayFamily::collimated(f.direction, f.anchor, f.domain);
    if (f.kind == "two_skew_lines") return RayFamily::two_skew_lines(f.d1_point, f.d1_direction, f.d2_point, f.d2_direction, f.domain);
    return RayFamily::normal_congruence(surfaces.at(f.surface), f.origin, f.axis, f.domain);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct SurfaceDraft {
  int line = 0;
  std::string kind;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, int> lines;
};

class SceneParser {
 public:
  explicit SceneParser(std::string_view text) : text_(text) {}

  Scene parse() {
    std::size_t pos = 0;
    int number = 0;
    while (pos <= text_.size()) {
      const auto end = text_.find('\n', pos);
      const std::string_view raw = text_.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      ++number;
      handle_line(raw, number);
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    return finish();
  }

 private:
  enum class Section { None, Surface, System, Family, Options };

  struct InterfaceDraft {
    std::string name;
    Action action;
    double n_in, n_out;
    int line, column;
  };

  void handle_line(std::string_view raw, int number) {
    const auto hash = raw.find('#');
    const std::string_view body = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (body.empty()) return;
    const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (body.front() == '[') {
      open_section(body, number, indent);
      return;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw Error::syntax(number, indent, "expected `key = value`");
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));
    const int value_col = static_cast<int>((value.empty() ? body.data() + eq : value.data()) - raw.data()) + 1;
    if (key.empty()) throw Error::syntax(number, indent, "missing key");
    line_ = number;
    column_ = value_col;
    switch (section_) {
      case Section::None: throw Error::syntax(number, indent, "key outside of any section");
      case Section::Surface: surface_key(key, value, number, indent); break;
      case Section::System: system_key(key, value, number, indent); break;
      case Section::Family: family_key(key, value, number, indent); break;
      case Section::Options: options_key(key, value, number, indent); break;
    }
  }

  void open_section(std::string_view body, int number, int col) {
    if (body.back() != ']') throw Error::syntax(number, col, "unterminated section header");
    const std::string_view inner = trim(body.substr(1, body.size() - 2));
    const auto space = inner.find_first_of(" \t");
    const std::string_view head = inner.substr(0, space);
    const std::string_view tail = space == std::string_view::npos ? std::string_view{} : trim(inner.substr(space));
    if (head == "surface") {
      if (tail.empty() || tail.find_first_of(" \t") != std::string_view::npos)
        throw Error::syntax(number, col, "surface section needs exactly one name");
      current_surface_ = std::string(tail);
      if (drafts_.count(current_surface_)) throw Error::syntax(number, col, "duplicate surface '" + current_surface_ + "'");
      drafts_[current_surface_].line = number;
      section_ = Section::Surface;
      return;
    }
    if (!tail.empty()) throw Error::syntax(number, col, "unexpected text in section header");
    auto once = [&](Section s, bool& seen) {
      if (seen) throw Error::syntax(number, col, "duplicate section [" + std::string(head) + "]");
      seen = true;
      section_ = s;
    };
    if (head == "system") once(Section::System, seen_system_);
    else if (head == "family") {
      once(Section::Family, seen_family_);
      scene_.family.emplace();
      scene_.family->kind.clear();
    } else if (head == "options") once(Section::Options, seen_options_);
    else throw Error::syntax(number, col, "unknown section [" + std::string(head) + "]");
  }

  double number(std::string_view v) const {
    const auto nums = numbers(v, 1);
    return nums[0];
  }

  std::vector<double> numbers(std::string_view v, std::size_t count) const {
    std::vector<double> out;
    std::istringstream in{std::string(v)};
    std::string token;
    while (in >> token) {
      std::size_t used = 0;
      double x;
      try {
        x = std::stod(token, &used);
      } catch (const std::exception&) {
        throw Error::syntax(line_, column_, "not a number: '" + token + "'");
      }
      if (used != token.size() || !std::isfinite(x)) throw Error::syntax(line_, column_, "not a number: '" + token + "'");
      out.push_back(x);
    }
    if (out.size() != count)
      throw Error::syntax(line_, column_, "expected " + std::to_string(count) + " number(s), got " + std::to_string(out.size()));
    return out;
  }

  Vec3 vec3(std::string_view v) const {
    const auto n = numbers(v, 3);
    return {n[0], n[1], n[2]};
  }
  Vec2 vec2(std::string_view v) const {
    const auto n = numbers(v, 2);
    return {n[0], n[1]};
  }
  int integer(std::string_view v) const {
    const double x = number(v);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw Error::syntax(line_, column_, "expected an integer");
    return static_cast<int>(x);
  }

  void surface_key(const std::string& key, std::string_view value, int number, int col) {
    static const std::map<std::string, std::size_t> arity = {
        {"normal", 3},   {"offset", 1},    {"center", 3},     {"radius", 1},     {"matrix", 6},      {"linear", 3},
        {"constant", 1}, {"amplitude", 1}, {"wavevector", 2}, {"height", 1},     {"orientation", 1}, {"bounds", 6}};
    SurfaceDraft& d = drafts_[current_surface_];
    if (key == "kind") {
      static const std::set<std::string> kinds = {"plane", "sphere", "quadric", "sinusoid"};
      if (!kinds.count(std::string(value))) throw Error::syntax(number, column_, "unknown surface kind '" + std::string(value) + "'");
      d.kind = std::string(value);
      return;
    }
    const auto it = arity.find(key);
    if (it == arity.end()) throw Error::syntax(number, col, "unknown surface key '" + key + "'");
    if (d.values.count(key)) throw Error::syntax(number, col, "duplicate key '" + key + "'");
    d.values[key] = numbers(value, it->second);
    d.lines[key] = number;
  }

  void system_key(const std::string& key, std::string_view value, int number, int col) {
    if (key == "ambient_index") {
      scene_.system.ambient_index = this->number(value);
      return;
    }
    if (key != "interface") throw Error::syntax(number, col, "unknown system key '" + key + "'");
    std::istringstream in{std::string(value)};
    std::string name, action;
    in >> name >> action;
    std::string rest;
    std::getline(in, rest);
    if (name.empty() || action.empty()) throw Error::syntax(number, column_, "expected `<surface> reflect|refract <indices>`");
    if (action == "reflect") {
      const double n = numbers(rest, 1)[0];
      interfaces_.push_back({name, Action::Reflect, n, n, number, column_});
    } else if (action == "refract") {
      const auto n = numbers(rest, 2);
      interfaces_.push_back({name, Action::Refract, n[0], n[1], number, column_});
    } else {
      throw Error::syntax(number, column_, "unknown action '" + action + "'");
    }
  }

  void family_key(const std::string& key, std::string_view value, int number, int col) {
    FamilySpec& f = *scene_.family;
    if (!family_keys_.insert(key).second) throw Error::syntax(number, col, "duplicate key '" + key + "'");
    if (key == "kind") {
      static const std::set<std::string> kinds = {"point_source", "collimated", "normal_congruence", "two_skew_lines"};
      if (!kinds.count(std::string(value))) throw Error::syntax(number, column_, "unknown family kind '" + std::string(value) + "'");
      f.kind = std::string(value);
    } else if (key == "apex") f.apex = vec3(value);
    else if (key == "axis") f.axis = vec3(value);
    else if (key == "direction") f.direction = vec3(value);
    else if (key == "anchor") f.anchor = vec3(value);
    else if (key == "surface") {
      f.surface = std::string(value);
      family_surface_line_ = number;
      family_surface_col_ = column_;
    } else if (key == "origin") f.origin = vec3(value);
    else if (key == "d1_point") f.d1_point = vec3(value);
    else if (key == "d1_direction") f.d1_direction = vec3(value);
    else if (key == "d2_point") f.d2_point = vec3(value);
    else if (key == "d2_direction") f.d2_direction = vec3(value);
    else if (key == "domain") {
      const auto n = numbers(value, 4);
      if (!(n[0] < n[1]) || !(n[2] < n[3])) throw Error::syntax(number, column_, "domain must be `k1_lo k1_hi k2_lo k2_hi` with lo < hi");
      f.domain = Domain{Vec2(n[0], n[2]), Vec2(n[1], n[3])};
    } else if (key == "grid") {
      f.grid = integer(value);
      if (f.grid < 3) throw Error::syntax(number, column_, "grid must be at least 3");
    } else throw Error::syntax(number, col, "unknown family key '" + key + "'");
  }

  void options_key(const std::string& key, std::string_view value, int number, int col) {
    SceneOptions& o = scene_.options;
    if (!option_keys_.insert(key).second) throw Error::syntax(number, col, "duplicate key '" + key + "'");
    if (key == "tol") o.tol = positive(value);
    else if (key == "step") o.step = positive(value);
    else if (key == "seed") {
      const int s = integer(value);
      if (s < 0) throw Error::syntax(number, column_, "seed must be non-negative");
      o.seed = static_cast<std::uint64_t>(s);
    } else if (key == "samples") {
      o.samples = integer(value);
      if (o.samples < 1) throw Error::syntax(number, column_, "samples must be positive");
    } else if (key == "k0") o.k0 = vec2(value);
    else if (key == "wavefront_constant") o.wavefront_constant = this->number(value);
    else if (key == "focus") o.focus = vec3(value);
    else if (key == "epsilon") {
      o.epsilon = integer(value);
      if (o.epsilon != 1 && o.epsilon != -1) throw Error::syntax(number, column_, "epsilon must be 1 or -1");
    } else if (key == "level") o.level = this->number(value);
    else if (key == "endpoint1") o.endpoint1 = vec3(value);
    else if (key == "endpoint2") o.endpoint2 = vec3(value);
    else throw Error::syntax(number, col, "unknown option '" + key + "'");
  }

  double positive(std::string_view v) const {
    const double x = number(v);
    if (!(x > 0)) throw Error::syntax(line_, column_, "value must be positive");
    return x;
  }

  ImplicitSurface build_surface(const std::string& name, const SurfaceDraft& d) const {
    if (d.kind.empty()) throw Error::syntax(d.line, 1, "surface '" + name + "' has no kind");
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"plane", {"normal", "offset"}},
        {"sphere", {"center", "radius"}},
        {"quadric", {"matrix", "linear", "constant"}},
        {"sinusoid", {"amplitude", "wavevector", "height"}},
    };
    const auto& keys = allowed.at(d.kind);
    for (const auto& [key, line] : d.lines)
      if (key != "orientation" && key != "bounds" && !keys.count(key))
        throw Error::syntax(line, 1, "key '" + key + "' does not apply to a " + d.kind);
    auto get = [&](const std::string& key, std::vector<double> fallback) {
      const auto it = d.values.find(key);
      return it == d.values.end() ? fallback : it->second;
    };
    auto require = [&](const std::string& key) {
      const auto it = d.values.find(key);
      if (it == d.values.end()) throw Error::syntax(d.line, 1, "surface '" + name + "' needs '" + key + "'");
      return it->second;
    };
    const auto orient = get("orientation", {1.0});
    if (orient[0] != 1.0 && orient[0] != -1.0) throw Error::syntax(d.lines.at("orientation"), 1, "orientation must be 1 or -1");
    const int o = static_cast<int>(orient[0]);
    std::optional<Box> bounds;
    if (d.values.count("bounds")) {
      const auto& b = d.values.at("bounds");
      bounds = Box{Vec3(b[0], b[1], b[2]), Vec3(b[3], b[4], b[5])};
      if ((bounds->lo.array() > bounds->hi.array()).any())
        throw Error::syntax(d.lines.at("bounds"), 1, "bounds are xlo ylo zlo xhi yhi zhi with lo <= hi");
    }
    auto v3 = [](const std::vector<double>& x) { return Vec3(x[0], x[1], x[2]); };
    try {
      if (d.kind == "plane") return ImplicitSurface(Plane{v3(require("normal")), require("offset")[0]}, o, bounds);
      if (d.kind == "sphere") return ImplicitSurface(Sphere{v3(require("center")), require("radius")[0]}, o, bounds);
      if (d.kind == "quadric") {
        const auto m = require("matrix");
        Mat3 a;
        a << m[0], m[1], m[2], m[1], m[3], m[4], m[2], m[4], m[5];
        return ImplicitSurface(Quadric{a, v3(get("linear", {0, 0, 0})), get("constant", {0})[0]}, o, bounds);
      }
      const auto w = require("wavevector");
      return ImplicitSurface(Sinusoid{require("amplitude")[0], Vec2(w[0], w[1]), get("height", {0})[0]}, o, bounds);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SyntaxError) throw;
      throw Error::syntax(d.line, 1, "surface '" + name + "': " + e.detail());
    }
  }

  Scene finish() {
    for (const auto& [name, d] : drafts_) scene_.surfaces.emplace(name, build_surface(name, d));
    for (const auto& f : interfaces_) {
      const auto it = scene_.surfaces.find(f.name);
      if (it == scene_.surfaces.end())
        throw Error(ErrorCode::UnknownSurface, "'" + f.name + "' (line " + std::to_string(f.line) + ")");
      scene_.system.interfaces.push_back({it->second, f.action, f.n_in, f.n_out});
      scene_.interface_names.push_back(f.name);
    }
    scene_.system.validate();
    if (scene_.family) {
      const FamilySpec& f = *scene_.family;
      if (f.kind.empty()) throw Error::syntax(0, 1, "[family] has no kind");
      if (f.kind == "normal_congruence") {
        if (f.surface.empty()) throw Error::syntax(0, 1, "normal_congruence family needs 'surface'");
        if (!scene_.surfaces.count(f.surface))
          throw Error(ErrorCode::UnknownSurface, "'" + f.surface + "' (line " + std::to_string(family_surface_line_) + ")");
      }
    }
    return std::move(scene_);
  }

  std::string_view text_;
  Scene scene_;
  Section section_ = Section::None;
  std::string current_surface_;
  std::map<std::string, SurfaceDraft> drafts_;
  std::vector<InterfaceDraft> interfaces_;
  std::set<std::string> family_keys_, option_keys_;
  bool seen_system_ = false, seen_family_ = false, seen_options_ = false;
  int line_ = 0, column_ = 0;
  int family_surface_line_ = 0, family_surface_col_ = 0;
};

}  // namespace detail

/// Strict parse: unknown sections and keys, malformed numbers and duplicate
/// keys raise SyntaxError with a line and column.
inline Scene parse_scene(std::string_view text) { return detail::SceneParser(text).parse(); }

}  // namespace oline
