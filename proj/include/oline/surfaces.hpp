#pragma once

// Implicit surfaces f(X) = 0 used as mirrors and refracting interfaces.

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/line_space.hpp"

#include <limits>
#include <numbers>
#include <optional>
#include <variant>

namespace oline {

/// n . x = offset, with |n| = 1.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

/// |x - center| = radius.
struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// x^T A x + b . x + c = 0, A symmetric.
struct Quadric {
  Mat3 matrix = Mat3::Zero();
  Vec3 linear = Vec3::Zero();
  double constant = 0.0;
};

/// Graph z = height + amplitude * sin(k . (x, y)).
struct Sinusoid {
  double amplitude = 0.0;
  Vec2 wavevector = Vec2::Zero();
  double height = 0.0;
};

struct Box {
  Vec3 lo;
  Vec3 hi;
  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

enum class SurfaceKind { Plane, Sphere, Quadric, Sinusoid };

constexpr const char* to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Plane: return "plane";
    case SurfaceKind::Sphere: return "sphere";
    case SurfaceKind::Quadric: return "quadric";
    case SurfaceKind::Sinusoid: return "sinusoid";
  }
  return "?";
}

class ImplicitSurface {
 public:
  using Shape = std::variant<Plane, Sphere, Quadric, Sinusoid>;

  /// `orientation` = +1 declares the side where f > 0 as the incoming side,
  /// -1 the side where f < 0.
  explicit ImplicitSurface(Shape shape, int orientation = +1, std::optional<Box> bounds = std::nullopt)
      : shape_(std::move(shape)), orientation_(orientation >= 0 ? 1 : -1), bounds_(bounds) {
    if (auto* p = std::get_if<Plane>(&shape_)) {
      const double len = p->normal.norm();
      if (len < 1e-12) throw Error(ErrorCode::InvalidArgument, "plane normal is zero");
      p->normal /= len;
      p->offset /= len;
    } else if (auto* s = std::get_if<Sphere>(&shape_)) {
      if (!(s->radius > 0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
    } else if (auto* q = std::get_if<Quadric>(&shape_)) {
      q->matrix = 0.5 * (q->matrix + q->matrix.transpose()).eval();
    }
  }

  static ImplicitSurface plane(const Vec3& normal, double offset, int orientation = +1) {
    return ImplicitSurface(Plane{normal, offset}, orientation);
  }
  static ImplicitSurface sphere(const Vec3& center, double radius, int orientation = +1) {
    return ImplicitSurface(Sphere{center, radius}, orientation);
  }
  static ImplicitSurface quadric(const Mat3& a, const Vec3& b, double c, int orientation = +1) {
    return ImplicitSurface(Quadric{a, b, c}, orientation);
  }
  static ImplicitSurface sinusoid(double amplitude, const Vec2& k, double height = 0.0, int orientation = +1) {
    return ImplicitSurface(Sinusoid{amplitude, k, height}, orientation);
  }

  SurfaceKind kind() const { return static_cast<SurfaceKind>(shape_.index()); }
  const Shape& shape() const { return shape_; }
  int orientation() const { return orientation_; }
  const std::optional<Box>& bounds() const { return bounds_; }
  ImplicitSurface with_bounds(const Box& box) const { return ImplicitSurface(shape_, orientation_, box); }

  double value(const Vec3& x) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Plane>) {
            return s.normal.dot(x) - s.offset;
          } else if constexpr (std::is_same_v<T, Sphere>) {
            return (x - s.center).norm() - s.radius;
          } else if constexpr (std::is_same_v<T, Quadric>) {
            return x.dot(s.matrix * x) + s.linear.dot(x) + s.constant;
          } else {
            return x.z() - s.height - s.amplitude * std::sin(s.wavevector.dot(x.head<2>()));
          }
        },
        shape_);
  }

  Vec3 gradient(const Vec3& x) const {
    return std::visit(
        [&](const auto& s) -> Vec3 {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Plane>) {
            return s.normal;
          } else if constexpr (std::is_same_v<T, Sphere>) {
            const Vec3 r = x - s.center;
            const double len = r.norm();
            return len > 0 ? Vec3(r / len) : Vec3::Zero();
          } else if constexpr (std::is_same_v<T, Quadric>) {
            return 2.0 * s.matrix * x + s.linear;
          } else {
            const double c = s.amplitude * std::cos(s.wavevector.dot(x.head<2>()));
            return {-c * s.wavevector.x(), -c * s.wavevector.y(), 1.0};
          }
        },
        shape_);
  }

 private:
  Shape shape_;
  int orientation_;
  std::optional<Box> bounds_;
};

struct Intersection {
  Vec3 point;
  double t = 0.0;
  Vec3 normal;  ///< unit, u . normal <= 0
  double cos_incidence = 0.0;
};

/// Unit normal at a surface point, oriented toward the declared incoming side.
inline Vec3 normal_at(const ImplicitSurface& s, const Vec3& p) {
  const Vec3 g = s.gradient(p);
  const double gn = g.norm();
  if (!(gn >= limits::min_gradient)) throw Error(ErrorCode::DegenerateGradient, "|grad f| = " + format_real(gn));
  const double dist = std::abs(s.value(p)) / gn;
  if (dist > 1e-8 * std::max(1.0, p.norm())) throw Error(ErrorCode::OffSurface, "first-order distance " + format_real(dist));
  return s.orientation() * g / gn;
}

namespace detail {

/// Real roots of a t^2 + b t + c in increasing order.
inline int solve_quadratic(double a, double b, double c, double roots[2]) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return 0;
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-300) return 0;
    roots[0] = -c / b;
    return 1;
  }
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return 0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  double r1 = q / a;
  double r2 = q != 0.0 ? c / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  roots[0] = r1;
  roots[1] = r2;
  return 2;
}

/// Safeguarded Newton iteration on a bracket [lo, hi] with f(lo) * f(hi) <= 0.
template <class F, class DF>
double newton_bisect(const F& f, const DF& df, double lo, double hi, double flo) {
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double ft = f(t);
    if (ft == 0.0) return t;
    if ((ft < 0) == (flo < 0)) {
      lo = t;
      flo = ft;
    } else {
      hi = t;
    }
    const double d = df(t);
    double next = d != 0.0 ? t - ft / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = std::max(limits::root_tolerance, 4 * std::numeric_limits<double>::epsilon() * std::abs(next));
    if (std::abs(next - t) <= tol || hi - lo <= tol) return next;
    t = next;
  }
  return t;
}

/// Visits roots of f along the ray in increasing t inside (t_lo, t_hi] until
/// the visitor returns true. Returns whether the visitor accepted a root.
template <class Visitor>
bool for_each_root(const Ray& ray, const ImplicitSurface& s, double t_lo, double t_hi, const Visitor& visit) {
  const Vec3 o = ray.origin();
  const Vec3& u = ray.direction();
  auto visit_sorted = [&](double* roots, int n) {
    for (int i = 0; i < n; ++i)
      if (roots[i] > t_lo && roots[i] <= t_hi && visit(roots[i])) return true;
    return false;
  };
  switch (s.kind()) {
    case SurfaceKind::Plane: {
      const auto& p = std::get<Plane>(s.shape());
      const double dn = p.normal.dot(u);
      if (dn == 0.0) return false;
      double r[1] = {(p.offset - p.normal.dot(o)) / dn};
      return visit_sorted(r, 1);
    }
    case SurfaceKind::Sphere: {
      const auto& sp = std::get<Sphere>(s.shape());
      const Vec3 oc = o - sp.center;
      double r[2];
      const int n = solve_quadratic(1.0, 2.0 * oc.dot(u), oc.squaredNorm() - sp.radius * sp.radius, r);
      return visit_sorted(r, n);
    }
    case SurfaceKind::Quadric: {
      const auto& q = std::get<Quadric>(s.shape());
      const Vec3 au = q.matrix * u;
      double r[2];
      const int n = solve_quadratic(u.dot(au), 2.0 * o.dot(au) + q.linear.dot(u), s.value(o), r);
      return visit_sorted(r, n);
    }
    case SurfaceKind::Sinusoid: {
      const auto& w = std::get<Sinusoid>(s.shape());
      const double amp = std::abs(w.amplitude);
      const double omega = w.wavevector.dot(u.head<2>());
      const double phase0 = w.wavevector.dot(o.head<2>());
      auto f = [&](double t) { return o.z() + t * u.z() - w.height - w.amplitude * std::sin(phase0 + t * omega); };
      auto df = [&](double t) { return u.z() - w.amplitude * omega * std::cos(phase0 + t * omega); };
      // Roots only occur where the height lies within the amplitude band.
      double lo = t_lo, hi = t_hi;
      if (std::abs(u.z()) > 1e-15) {
        double a = (w.height - amp - o.z()) / u.z();
        double b = (w.height + amp - o.z()) / u.z();
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a - 1e-9);
        hi = std::min(hi, b + 1e-9);
      } else if (std::abs(o.z() - w.height) > amp) {
        return false;
      }
      if (!(hi > lo)) return false;
      if (amp == 0.0) {
        if (u.z() == 0.0) return false;
        double r[1] = {(w.height - o.z()) / u.z()};
        return visit_sorted(r, 1);
      }
      double step = (hi - lo) / 8.0;
      if (std::abs(omega) > 0) step = std::min(step, 0.125 * std::numbers::pi / std::abs(omega));
      if ((hi - lo) / step > 5e7) throw Error(ErrorCode::NoIntersection, "sinusoid search interval too long");
      double a = lo;
      double fa = f(a);
      while (a < hi) {
        const double b = std::min(hi, a + step);
        const double fb = f(b);
        double root;
        bool found = false;
        if (fa == 0.0 && a > t_lo) {
          root = a;
          found = true;
        } else if ((fa < 0) != (fb < 0) || fb == 0.0) {
          root = fb == 0.0 ? b : newton_bisect(f, df, a, b, fa);
          found = true;
        }
        if (found && root > t_lo && root <= t_hi && visit(root)) return true;
        a = b;
        fa = fb;
      }
      return false;
    }
  }
  return false;
}

}  // namespace detail

/// First crossing of the ray with the surface strictly after t_min.
inline Intersection intersect(const Ray& ray, const ImplicitSurface& s, double t_min = 0.0,
                              double t_max = limits::search_horizon) {
  if (t_min < 0) throw Error(ErrorCode::InvalidArgument, "t_min must be non-negative");
  std::optional<double> hit;
  detail::for_each_root(ray, s, t_min, t_max, [&](double t) {
    if (s.bounds() && !s.bounds()->contains(ray.at(t))) return false;
    hit = t;
    return true;
  });
  if (!hit) throw Error(ErrorCode::NoIntersection, std::string("ray misses ") + to_string(s.kind()));
  Intersection out;
  out.t = *hit;
  out.point = ray.at(*hit);
  const Vec3 g = s.gradient(out.point);
  const double gn = g.norm();
  if (!(gn >= limits::min_gradient)) throw Error(ErrorCode::DegenerateGradient, "|grad f| = " + format_real(gn));
  Vec3 n = s.orientation() * g / gn;
  const Vec3& u = ray.direction();
  if (u.dot(n) > 0) n = -n;
  out.normal = n;
  out.cos_incidence = u.dot(n);
  if (std::abs(out.cos_incidence) < limits::transverse)
    throw Error(ErrorCode::Tangential, "|u.n| = " + format_real(std::abs(out.cos_incidence)));
  return out;
}

/// Characteristic length of the surface, used to scale step sizes.
inline double length_scale(const ImplicitSurface& s) {
  if (s.kind() == SurfaceKind::Sphere) return std::get<Sphere>(s.shape()).radius;
  return 1.0;
}

}  // namespace oline
