#pragma once

// Reflection and refraction as maps on directions and on lines, and
// sequential propagation through an ordered list of interfaces.

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/line_space.hpp"
#include "oline/surfaces.hpp"

#include <vector>

namespace oline {

/// u - 2 (u.n) n.
inline Vec3 reflect_direction(const Vec3& u, const Vec3& n) {
  const double c = u.dot(n);
  if (std::abs(c) < limits::transverse) throw Error(ErrorCode::Grazing, "|u.n| = " + format_real(std::abs(c)));
  return (u - 2.0 * c * n).normalized();
}

/// Snell-Descartes in vector form: the tangential part of n1 u is conserved.
/// `n` may point to either side; the refracted ray keeps the sign of u.n.
inline Vec3 refract_direction(const Vec3& u, const Vec3& n, double n1, double n2) {
  if (!(n1 > 0) || !(n2 > 0)) throw Error(ErrorCode::InvalidArgument, "refractive indices must be positive");
  const double c = u.dot(n);
  if (std::abs(c) < limits::transverse) throw Error(ErrorCode::Grazing, "|u.n| = " + format_real(std::abs(c)));
  const double ratio = n1 / n2;
  const Vec3 tangential = u - c * n;
  const double sin2 = ratio * ratio * tangential.squaredNorm();
  if (sin2 >= 1.0)
    throw Error(ErrorCode::TotalInternalReflection,
                "(n1/n2)|v1| = " + format_real(std::sqrt(sin2)) + " >= 1");
  const double normal_part = std::copysign(std::sqrt(1.0 - sin2), c);
  return ratio * tangential + normal_part * n;
}

enum class Action { Reflect, Refract };

constexpr const char* to_string(Action a) { return a == Action::Reflect ? "reflect" : "refract"; }

struct Interface {
  ImplicitSurface surface;
  Action action = Action::Reflect;
  double n_in = 1.0;
  double n_out = 1.0;  ///< equals n_in for mirrors

  static Interface mirror(ImplicitSurface s, double index = 1.0) { return {std::move(s), Action::Reflect, index, index}; }
  static Interface refractor(ImplicitSurface s, double n1, double n2) { return {std::move(s), Action::Refract, n1, n2}; }

  /// Index of the medium the ray travels in after this interface.
  double index_after() const { return action == Action::Refract ? n_out : n_in; }
};

struct OpticalSystem {
  std::vector<Interface> interfaces;
  double ambient_index = 1.0;

  /// Throws BadMediaChain if indices are non-positive, a refraction keeps the
  /// same index, or consecutive media disagree.
  void validate() const {
    if (!(ambient_index > 0)) throw Error(ErrorCode::BadMediaChain, "ambient index must be positive");
    double current = ambient_index;
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
      const auto& f = interfaces[i];
      auto bad = [i](const std::string& what) { return Error(ErrorCode::BadMediaChain, what).at_interface(static_cast<int>(i)); };
      if (!(f.n_in > 0) || !(f.n_out > 0)) throw bad("indices must be positive");
      if (f.action == Action::Refract && f.n_in == f.n_out) throw bad("refraction requires n_in != n_out");
      if (std::abs(f.n_in - current) > 1e-12)
        throw bad("n_in " + format_real(f.n_in) + " does not match medium " + format_real(current));
      current = f.index_after();
    }
  }

  double index_of_segment(std::size_t segment) const {
    return segment == 0 ? ambient_index : interfaces[segment - 1].index_after();
  }
};

/// Outgoing line and the hit that produced it.
struct Transfer {
  OrientedLine line;
  Intersection hit;

  /// The outgoing ray, starting at the hit point.
  Ray ray() const { return Ray{line, line.parameter_of(hit.point)}; }
};

inline Transfer reflect_line(const Ray& ray, const ImplicitSurface& s, double t_min = 0.0) {
  Intersection hit = intersect(ray, s, t_min);
  return {line_through(hit.point, reflect_direction(ray.direction(), hit.normal)), hit};
}

inline Transfer refract_line(const Ray& ray, const ImplicitSurface& s, double n1, double n2, double t_min = 0.0) {
  Intersection hit = intersect(ray, s, t_min);
  return {line_through(hit.point, refract_direction(ray.direction(), hit.normal, n1, n2)), hit};
}

inline Transfer apply_interface(const Ray& ray, const Interface& f, double t_min = 0.0) {
  return f.action == Action::Reflect ? reflect_line(ray, f.surface, t_min)
                                     : refract_line(ray, f.surface, f.n_in, f.n_out, t_min);
}

struct TraceResult {
  Ray ray_out;  ///< outgoing line, origin at the last hit (or the start)
  std::vector<Intersection> hits;
  double optical_length = 0.0;

  const OrientedLine& line_out() const { return ray_out.line; }
};

struct TraceOptions {
  /// Minimum ray parameter for every interface search; keeps a ray from
  /// re-detecting the surface it has just left.
  double t_min = 1e-9;
};

/// Folds the interfaces over the ray in order. Errors carry the index of the
/// failing interface.
inline TraceResult propagate_system(const Ray& ray, const OpticalSystem& sys, const TraceOptions& opts = {}) {
  TraceResult out{ray, {}, 0.0};
  out.hits.reserve(sys.interfaces.size());
  double index = sys.ambient_index;
  for (std::size_t i = 0; i < sys.interfaces.size(); ++i) {
    try {
      const Transfer tr = apply_interface(out.ray_out, sys.interfaces[i], opts.t_min);
      out.optical_length += index * tr.hit.t;
      out.hits.push_back(tr.hit);
      out.ray_out = tr.ray();
      index = sys.interfaces[i].index_after();
    } catch (const Error& e) {
      throw e.at_interface(static_cast<int>(i));
    }
  }
  return out;
}

inline TraceResult propagate_system(const OrientedLine& line, const OpticalSystem& sys, const Vec3& start,
                                    const TraceOptions& opts = {}) {
  if (line.distance_to(start) > 1e-9 * std::max(1.0, start.norm()))
    throw Error(ErrorCode::InvalidArgument, "start point is not on the line");
  return propagate_system(Ray{line, line.parameter_of(start)}, sys, opts);
}

}  // namespace oline
