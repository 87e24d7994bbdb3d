#pragma once

// Two-parameter families of rays, their Lagrangian defect, regular points,
// wavefront reconstruction and transport through optical systems.

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/line_space.hpp"
#include "oline/optics.hpp"
#include "oline/surfaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace oline {

/// Closed parameter rectangle [lo.x, hi.x] x [lo.y, hi.y].
struct Domain {
  Vec2 lo = Vec2(-1, -1);
  Vec2 hi = Vec2(1, 1);

  Vec2 center() const { return 0.5 * (lo + hi); }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(const Vec2& k) const {
    const double slack = 1e-15 * std::max(1.0, diameter());
    return (k.array() >= lo.array() - slack).all() && (k.array() <= hi.array() + slack).all();
  }
};

enum class FamilyKind { PointSource, Collimated, NormalCongruence, TwoSkewLines, Transformed, Custom };

constexpr const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::PointSource: return "point_source";
    case FamilyKind::Collimated: return "collimated";
    case FamilyKind::NormalCongruence: return "normal_congruence";
    case FamilyKind::TwoSkewLines: return "two_skew_lines";
    case FamilyKind::Transformed: return "transformed";
    case FamilyKind::Custom: return "custom";
  }
  return "?";
}

/// Smooth map k -> ray. The ray origin is where light actually starts
/// (the source point, the emitting surface, the last interface); the line is
/// what the symplectic machinery sees.
class RayFamily {
 public:
  using RayFn = std::function<Ray(const Vec2&)>;

  RayFamily(FamilyKind kind, Domain domain, RayFn fn) : kind_(kind), domain_(domain), fn_(std::move(fn)) {}

  FamilyKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  Ray ray(const Vec2& k) const { return fn_(k); }
  OrientedLine eval(const Vec2& k) const { return fn_(k).line; }
  OrientedLine operator()(const Vec2& k) const { return eval(k); }

  /// 1e-5 times the domain diameter.
  double default_step() const { return 1e-5 * domain_.diameter(); }

  /// Rays from `apex` with directions normalize(axis + k1 e1 + k2 e2).
  static RayFamily point_source(const Vec3& apex, const Vec3& axis, const Domain& domain) {
    const Vec3 a = axis.normalized();
    const auto [e1, e2] = orthonormal_basis(a);
    return {FamilyKind::PointSource, domain,
            [=](const Vec2& k) { return Ray::from(apex, a + k.x() * e1 + k.y() * e2); }};
  }

  /// Parallel rays along `direction` through anchor + k1 e1 + k2 e2.
  static RayFamily collimated(const Vec3& direction, const Vec3& anchor, const Domain& domain) {
    const Vec3 d = direction.normalized();
    const auto [e1, e2] = orthonormal_basis(d);
    return {FamilyKind::Collimated, domain,
            [=](const Vec2& k) { return Ray::from(anchor + k.x() * e1 + k.y() * e2, d); }};
  }

  /// Normals of `surface` (oriented toward its declared incoming side) at the
  /// points where carrier rays from `origin` along normalize(axis + k1 e1 +
  /// k2 e2) first meet it.
  static RayFamily normal_congruence(const ImplicitSurface& surface, const Vec3& origin, const Vec3& axis,
                                     const Domain& domain) {
    const Vec3 a = axis.normalized();
    const auto [e1, e2] = orthonormal_basis(a);
    return {FamilyKind::NormalCongruence, domain, [=](const Vec2& k) {
              const Ray carrier = Ray::from(origin, a + k.x() * e1 + k.y() * e2);
              const Vec3 x = intersect(carrier, surface).point;
              return Ray::from(x, normal_at(surface, x));
            }};
  }

  /// Lines meeting D1 = p1 + s d1 and D2 = p2 + t d2, oriented from D1 to D2,
  /// with (s, t) = k.
  static RayFamily two_skew_lines(const Vec3& p1, const Vec3& d1, const Vec3& p2, const Vec3& d2, const Domain& domain) {
    return {FamilyKind::TwoSkewLines, domain, [=](const Vec2& k) {
              const Vec3 a = p1 + k.x() * d1;
              const Vec3 b = p2 + k.y() * d2;
              return Ray::from(a, b - a);
            }};
  }

  static RayFamily custom(RayFn fn, const Domain& domain) { return {FamilyKind::Custom, domain, std::move(fn)}; }

 private:
  FamilyKind kind_;
  Domain domain_;
  RayFn fn_;
};

/// The family seen after `sys`: each ray is propagated through every interface.
/// The system is captured by value, so the result holds no shared mutable state.
inline RayFamily transform_family(const RayFamily& family, const OpticalSystem& sys) {
  sys.validate();
  if (sys.interfaces.empty()) return family;
  auto shared = std::make_shared<const OpticalSystem>(sys);
  return {FamilyKind::Transformed, family.domain(), [family, shared](const Vec2& k) {
            try {
              return propagate_system(family.ray(k), *shared).ray_out;
            } catch (const Error& e) {
              throw e.at_parameter(k);
            }
          }};
}

/// n nodes spanning [lo + inset, hi - inset].
inline std::vector<double> grid_axis(double lo, double hi, int n, double inset) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = lo + inset, b = hi - inset;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1);
  return out;
}

namespace detail {

inline void require_neighbourhood(const RayFamily& f, const Vec2& k, double h) {
  for (int i = 0; i < 2; ++i)
    for (double s : {-h, h}) {
      Vec2 kk = k;
      kk(i) += s;
      if (!f.domain().contains(kk))
        throw Error(ErrorCode::DomainBoundary,
                    "k=(" + format_real(k.x()) + "," + format_real(k.y()) + ") with step " + format_real(h) + " leaves the domain");
    }
}

struct FamilyDerivatives {
  OrientedLine line;
  Vec3 dq[2];
  Vec3 du[2];
};

inline FamilyDerivatives derivatives(const RayFamily& f, const Vec2& k, double h) {
  FamilyDerivatives d{f.eval(k), {}, {}};
  // Foot points are taken about the foot of L(k) itself so the result does
  // not depend on where the family sits in space.
  const Vec3 o = d.line.foot();
  auto foot = [&o](const OrientedLine& l) {
    const Vec3 x = l.foot() - o;
    return Vec3(x - x.dot(l.direction()) * l.direction());
  };
  for (int i = 0; i < 2; ++i) {
    Vec2 kp = k, km = k;
    kp(i) += h;
    km(i) -= h;
    const OrientedLine lp = f.eval(kp), lm = f.eval(km);
    d.dq[i] = (foot(lp) - foot(lm)) / (2 * h);
    d.du[i] = (lp.direction() - lm.direction()) / (2 * h);
  }
  return d;
}

}  // namespace detail

/// omega evaluated on the two coordinate tangents of the family:
/// dP/dk1 . du/dk2 - dP/dk2 . du/dk1 with P the foot point. Zero exactly on
/// rectangular (Lagrangian) families.
inline double defect(const RayFamily& f, const Vec2& k, double h) {
  detail::require_neighbourhood(f, k, h);
  const auto d = detail::derivatives(f, k, h);
  return d.dq[0].dot(d.du[1]) - d.dq[1].dot(d.du[0]);
}

inline double defect(const RayFamily& f, const Vec2& k) { return defect(f, k, f.default_step()); }

/// Richardson diagnostic: |defect(h) - defect(h/2)|.
inline double defect_step_sensitivity(const RayFamily& f, const Vec2& k, double h) {
  return std::abs(defect(f, k, h) - defect(f, k, 0.5 * h));
}

/// Values on a k1 x k2 grid, stored row-major with k1 outer.
struct DefectGrid {
  std::vector<double> k1;
  std::vector<double> k2;
  std::vector<double> values;
  double max_abs_defect = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * k2.size() + j]; }

  void write_csv(std::ostream& os) const {
    os << "k1,k2,value\n";
    for (std::size_t i = 0; i < k1.size(); ++i)
      for (std::size_t j = 0; j < k2.size(); ++j)
        os << format_real(k1[i]) << ',' << format_real(k2[j]) << ',' << format_real(at(i, j)) << '\n';
  }
};

struct GridOptions {
  int resolution = 21;
  std::optional<double> step;  ///< defaults to the family's default step
};

/// Nodes are inset from the domain boundary by two steps so every central
/// difference (and the wavefront's offset stencils) stays inside the domain.
inline DefectGrid defect_grid(const RayFamily& f, const GridOptions& opts = {}) {
  if (opts.resolution < 3) throw Error(ErrorCode::InvalidArgument, "grid must be at least 3x3");
  const double h = opts.step.value_or(f.default_step());
  const Domain& d = f.domain();
  DefectGrid g;
  g.k1 = grid_axis(d.lo.x(), d.hi.x(), opts.resolution, 2 * h);
  g.k2 = grid_axis(d.lo.y(), d.hi.y(), opts.resolution, 2 * h);
  g.values.reserve(g.k1.size() * g.k2.size());
  for (double a : g.k1)
    for (double b : g.k2) {
      const Vec2 k(a, b);
      double v;
      try {
        v = defect(f, k, h);
      } catch (const Error& e) {
        throw e.code() == ErrorCode::DomainBoundary ? e : e.at_parameter(k);
      }
      g.values.push_back(v);
      g.max_abs_defect = std::max(g.max_abs_defect, std::abs(v));
    }
  return g;
}

/// Singular-value ratio of the 4x2 chart Jacobian; below 1e-8 the family is
/// not immersed at k.
inline double immersion_ratio(const RayFamily& f, const Vec2& k, double h) {
  const auto jac = chart_jacobian_2(f, k, h);
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 2>> svd(jac);
  const auto sv = svd.singularValues();
  return sv(0) > 0 ? sv(1) / sv(0) : 0.0;
}

struct RectangularityResult {
  bool rectangular = false;
  double tolerance = 0.0;
  DefectGrid grid;
};

/// Defect sweep plus immersion check. Default tolerance: 1e-6 x domain diameter.
inline RectangularityResult is_rectangular(const RayFamily& f, const GridOptions& opts = {},
                                           std::optional<double> tol = std::nullopt) {
  RectangularityResult r;
  r.tolerance = tol.value_or(1e-6 * f.domain().diameter());
  r.grid = defect_grid(f, opts);
  const double h = opts.step.value_or(f.default_step());
  for (double a : r.grid.k1)
    for (double b : r.grid.k2) {
      const Vec2 k(a, b);
      const double ratio = immersion_ratio(f, k, h);
      if (!(ratio > 1e-8))
        throw Error(ErrorCode::ImmersionFailure, "singular value ratio " + format_real(ratio)).at_parameter(k);
    }
  r.rectangular = r.grid.max_abs_defect < r.tolerance;
  return r;
}

/// Local-diffeomorphism test on the plane orthogonal to L(k) through the point
/// at parameter t (measured from the foot point of L(k)).
inline double transverse_jacobian(const RayFamily& f, const Vec2& k, double t, double h) {
  detail::require_neighbourhood(f, k, h);
  const OrientedLine l0 = f.eval(k);
  const Vec3 m0 = l0.point_at(t);
  const Vec3& n = l0.direction();
  const auto [e1, e2] = orthonormal_basis(n);
  auto coords = [&](const Vec2& kk) {
    const OrientedLine l = f.eval(kk);
    const double denom = l.direction().dot(n);
    const double s = (m0 - l.foot()).dot(n) / denom;
    const Vec3 x = l.point_at(s) - m0;
    return Vec2(x.dot(e1), x.dot(e2));
  };
  Eigen::Matrix2d jac;
  for (int i = 0; i < 2; ++i) {
    Vec2 kp = k, km = k;
    kp(i) += h;
    km(i) -= h;
    jac.col(i) = (coords(kp) - coords(km)) / (2 * h);
  }
  return jac.determinant();
}

inline bool is_regular_point(const RayFamily& f, const Vec2& k, double t, std::optional<double> step = std::nullopt) {
  return std::abs(transverse_jacobian(f, k, t, step.value_or(f.default_step()))) > 1e-8;
}

// ---------------------------------------------------------------------------
// Phase integration and wavefronts.
// ---------------------------------------------------------------------------

namespace detail {

/// u(k) . dP/dk_axis, P the foot point.
inline double phase_density(const RayFamily& f, const Vec2& k, int axis, double h) {
  Vec2 kp = k, km = k;
  kp(axis) += h;
  km(axis) -= h;
  return f.eval(k).direction().dot((f.eval(kp).foot() - f.eval(km).foot()) / (2 * h));
}

inline constexpr double phase_tolerance = 1e-9;

/// Trapezoid rule on [a, b] along `axis` at fixed other coordinate, halving
/// until two successive refinements differ by less than `tol`.
inline double axis_integral(const RayFamily& f, Vec2 at, int axis, double a, double b, double h,
                            double tol = phase_tolerance) {
  if (a == b) return 0.0;
  auto g = [&](double s) {
    at(axis) = s;
    return phase_density(f, at, axis, h);
  };
  const double len = b - a;
  double t = 0.5 * len * (g(a) + g(b));
  int intervals = 1;
  for (int level = 1; level <= 24; ++level) {
    double sum = 0.0;
    for (int i = 0; i < intervals; ++i) sum += g(a + len * (i + 0.5) / intervals);
    const double next = 0.5 * t + 0.5 * len / intervals * sum;
    intervals *= 2;
    const double delta = std::abs(next - t);
    t = next;
    if (level >= 2 && delta < tol) return t;
  }
  throw Error(ErrorCode::NoConvergence, "phase integral did not converge");
}

/// Integral of the phase density along `axis` from coordinate `from` to each
/// of `nodes`, accumulated segment by segment outward from `from`.
inline std::vector<double> cumulative_integral(const RayFamily& f, const Vec2& base, int axis, double from,
                                               const std::vector<double>& nodes, double h) {
  std::vector<double> out(nodes.size(), 0.0);
  std::vector<std::size_t> up, down;
  for (std::size_t i = 0; i < nodes.size(); ++i) (nodes[i] >= from ? up : down).push_back(i);
  std::sort(up.begin(), up.end(), [&](auto x, auto y) { return nodes[x] < nodes[y]; });
  std::sort(down.begin(), down.end(), [&](auto x, auto y) { return nodes[x] > nodes[y]; });
  for (const auto* order : {&up, &down}) {
    double acc = 0.0, pos = from;
    for (std::size_t idx : *order) {
      acc += axis_integral(f, base, axis, pos, nodes[idx], h);
      pos = nodes[idx];
      out[idx] = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Integral of u . dP from k0 to k along the axis-parallel path that first
/// moves in k1 and then in k2.
inline double integrate_phase(const RayFamily& f, const Vec2& k0, const Vec2& k, std::optional<double> step = std::nullopt) {
  const double h = step.value_or(f.default_step());
  return detail::axis_integral(f, k0, 0, k0.x(), k.x(), h) + detail::axis_integral(f, Vec2(k.x(), k0.y()), 1, k0.y(), k.y(), h);
}

struct Wavefront {
  std::vector<double> k1;
  std::vector<double> k2;
  std::vector<double> phase;   ///< F(k), with F(k0) = 0
  std::vector<Vec3> points;    ///< Q(k) = P(k) - (F(k) + c) u(k)
  double constant = 0.0;       ///< c
  Vec2 base = Vec2::Zero();    ///< k0
  double path_discrepancy = 0.0;
  /// max |u . dQ/dk_i| / |dQ/dk_i| over the grid, with F at the offset points
  /// taken from the same path construction as the grid values.
  double orthogonality = 0.0;

  std::size_t index(std::size_t i, std::size_t j) const { return i * k2.size() + j; }
  const Vec3& point(std::size_t i, std::size_t j) const { return points[index(i, j)]; }

  void write_csv(std::ostream& os) const {
    os << "k1,k2,qx,qy,qz,F\n";
    for (std::size_t i = 0; i < k1.size(); ++i)
      for (std::size_t j = 0; j < k2.size(); ++j) {
        const Vec3& q = point(i, j);
        os << format_real(k1[i]) << ',' << format_real(k2[j]) << ',' << format_real(q.x()) << ',' << format_real(q.y())
           << ',' << format_real(q.z()) << ',' << format_real(phase[index(i, j)]) << '\n';
      }
  }
};

struct WavefrontOptions {
  int resolution = 21;
  /// c in Q = P - (F + c) u; by default the wavefront passes through the foot
  /// point of L(k0).
  std::optional<double> constant;
  std::optional<double> step;
  /// Maximum allowed difference between the two L-shaped paths to a node.
  double path_tolerance = 1e-7;
  bool check_regularity = true;
};

/// Integrates the one-form u . dP over the grid along both L-shaped paths from
/// k0. Disagreement above `path_tolerance` means the form is not closed, i.e.
/// the family is not rectangular.
inline Wavefront reconstruct_wavefront(const RayFamily& f, const Vec2& k0, const WavefrontOptions& opts = {}) {
  if (opts.resolution < 3) throw Error(ErrorCode::InvalidArgument, "grid must be at least 3x3");
  const double h = opts.step.value_or(f.default_step());
  const Domain& d = f.domain();
  detail::require_neighbourhood(f, k0, h);

  Wavefront w;
  w.base = k0;
  w.k1 = grid_axis(d.lo.x(), d.hi.x(), opts.resolution, 2 * h);
  w.k2 = grid_axis(d.lo.y(), d.hi.y(), opts.resolution, 2 * h);
  const std::size_t n1 = w.k1.size(), n2 = w.k2.size();

  // Path A: along k1 at k2 = k0.y, then along k2.
  const auto row_a = detail::cumulative_integral(f, k0, 0, k0.x(), w.k1, h);
  std::vector<std::vector<double>> col_a(n1);
  for (std::size_t i = 0; i < n1; ++i) col_a[i] = detail::cumulative_integral(f, Vec2(w.k1[i], k0.y()), 1, k0.y(), w.k2, h);
  // Path B: along k2 at k1 = k0.x, then along k1.
  const auto col_b = detail::cumulative_integral(f, k0, 1, k0.y(), w.k2, h);

  w.phase.resize(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) w.phase[w.index(i, j)] = row_a[i] + col_a[i][j];

  for (std::size_t j = 0; j < n2; ++j) {
    const auto row_b = detail::cumulative_integral(f, Vec2(k0.x(), w.k2[j]), 0, k0.x(), w.k1, h);
    for (std::size_t i = 0; i < n1; ++i)
      w.path_discrepancy = std::max(w.path_discrepancy, std::abs(col_b[j] + row_b[i] - w.phase[w.index(i, j)]));
  }
  if (w.path_discrepancy > opts.path_tolerance)
    throw Error(ErrorCode::NotRectangular,
                "path discrepancy " + format_real(w.path_discrepancy) + " exceeds " + format_real(opts.path_tolerance));

  // F(k0) = 0 by construction, so the default constant is 0.
  w.constant = opts.constant.value_or(0.0);
  w.points.resize(n1 * n2, Vec3::Zero());
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      const Vec2 k(w.k1[i], w.k2[j]);
      const OrientedLine l = f.eval(k);
      const double s = -(w.phase[w.index(i, j)] + w.constant);
      w.points[w.index(i, j)] = l.point_at(s);
      if (opts.check_regularity && !is_regular_point(f, k, s, h))
        throw Error(ErrorCode::NonRegular, "wavefront point is not regular on its ray").at_parameter(k);
    }

  // Orthogonality: Q at k +- h e_i using path-A phases at the offset points.
  auto q_at = [&](const Vec2& k, double phase) { return f.eval(k).point_at(-(phase + w.constant)); };
  for (std::size_t i = 0; i < n1; ++i) {
    std::array<double, 2> row_off;
    std::array<std::vector<double>, 2> col_off;
    for (int s = 0; s < 2; ++s) {
      const double a = w.k1[i] + (s == 0 ? h : -h);
      row_off[s] = row_a[i] + detail::axis_integral(f, Vec2(w.k1[i], k0.y()), 0, w.k1[i], a, h);
      col_off[s] = detail::cumulative_integral(f, Vec2(a, k0.y()), 1, k0.y(), w.k2, h);
    }
    for (std::size_t j = 0; j < n2; ++j) {
      const Vec2 k(w.k1[i], w.k2[j]);
      const Vec3 u = f.eval(k).direction();
      const double phase = w.phase[w.index(i, j)];
      Vec3 dq[2];
      dq[0] = (q_at(Vec2(k.x() + h, k.y()), row_off[0] + col_off[0][j]) -
               q_at(Vec2(k.x() - h, k.y()), row_off[1] + col_off[1][j])) / (2 * h);
      const double up = detail::axis_integral(f, k, 1, k.y(), k.y() + h, h);
      const double down = detail::axis_integral(f, k, 1, k.y(), k.y() - h, h);
      dq[1] = (q_at(Vec2(k.x(), k.y() + h), phase + up) - q_at(Vec2(k.x(), k.y() - h), phase + down)) / (2 * h);
      for (const Vec3& v : dq) {
        const double len = v.norm();
        if (len > 0) w.orthogonality = std::max(w.orthogonality, std::abs(u.dot(v)) / len);
      }
    }
  }
  return w;
}

}  // namespace oline
