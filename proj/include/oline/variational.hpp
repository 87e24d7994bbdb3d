#pragma once

// The characteristic function of a device via Fermat stationarity, and the
// pointwise construction of a mirror that focuses a rectangular family.

#include "oline/common.hpp"
#include "oline/error.hpp"
#include "oline/families.hpp"
#include "oline/line_space.hpp"
#include "oline/optics.hpp"
#include "oline/surfaces.hpp"

#include <Eigen/SVD>

#include <limits>
#include <optional>
#include <ostream>
#include <vector>

namespace oline {

/// Graph chart of a surface over its tangent plane at `anchor`:
/// (a, b) -> anchor + a e1 + b e2 + s(a, b) n0, with s solving f = 0.
struct LocalChart {
  Vec3 anchor = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 n0 = Vec3::UnitZ();

  static LocalChart at(const ImplicitSurface& s, const Vec3& p) {
    const Vec3 g = s.gradient(p);
    if (g.norm() < limits::min_gradient) throw Error(ErrorCode::DegenerateGradient, "chart anchor has zero gradient");
    const Vec3 n = g.normalized();
    const auto [e1, e2] = orthonormal_basis(n);
    return {p, e1, e2, n};
  }

  Vec3 point(const ImplicitSurface& s, const Vec2& c) const {
    const Vec3 base = anchor + c.x() * e1 + c.y() * e2;
    double t = 0.0;
    for (int it = 0; it < 60; ++it) {
      const Vec3 x = base + t * n0;
      const double f = s.value(x);
      const double df = s.gradient(x).dot(n0);
      if (std::abs(df) < limits::min_gradient) break;
      const double step = f / df;
      t -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(t))) return base + t * n0;
    }
    const Vec3 x = base + t * n0;
    if (std::abs(s.value(x)) / std::max(s.gradient(x).norm(), limits::min_gradient) < 1e-12 * std::max(1.0, x.norm()))
      return x;
    throw Error(ErrorCode::NoConvergence, "surface chart projection failed");
  }

  /// Columns are dX/da and dX/db at the chart point through x.
  Eigen::Matrix<double, 3, 2> tangents(const ImplicitSurface& s, const Vec3& x) const {
    const Vec3 g = s.gradient(x);
    const double gn = g.dot(n0);
    Eigen::Matrix<double, 3, 2> t;
    t.col(0) = e1 - (g.dot(e1) / gn) * n0;
    t.col(1) = e2 - (g.dot(e2) / gn) * n0;
    return t;
  }
};

/// A broken path M1 -> X_1 -> ... -> X_n -> M2 with one hit per interface,
/// each hit held in local surface coordinates.
struct PathConfiguration {
  OpticalSystem system;
  Vec3 m1 = Vec3::Zero();
  Vec3 m2 = Vec3::Zero();
  std::vector<LocalChart> charts;
  std::vector<Vec2> coords;

  std::size_t size() const { return charts.size(); }

  Vec3 hit(std::size_t j) const { return charts[j].point(system.interfaces[j].surface, coords[j]); }

  /// M1, the hits, M2.
  std::vector<Vec3> vertices() const {
    std::vector<Vec3> v;
    v.reserve(size() + 2);
    v.push_back(m1);
    for (std::size_t j = 0; j < size(); ++j) v.push_back(hit(j));
    v.push_back(m2);
    return v;
  }

  static PathConfiguration from_points(const Vec3& m1, const Vec3& m2, const OpticalSystem& sys,
                                       const std::vector<Vec3>& hits) {
    if (hits.size() != sys.interfaces.size()) throw Error(ErrorCode::InvalidArgument, "one hit per interface required");
    PathConfiguration pc{sys, m1, m2, {}, {}};
    for (std::size_t j = 0; j < hits.size(); ++j) {
      pc.charts.push_back(LocalChart::at(sys.interfaces[j].surface, hits[j]));
      pc.coords.push_back(Vec2::Zero());
    }
    return pc;
  }

  /// Moves every chart anchor to the current hit; coordinates become zero.
  void reanchor() {
    for (std::size_t j = 0; j < size(); ++j) {
      charts[j] = LocalChart::at(system.interfaces[j].surface, hit(j));
      coords[j] = Vec2::Zero();
    }
  }

  Eigen::VectorXd stacked() const {
    Eigen::VectorXd x(2 * static_cast<Eigen::Index>(size()));
    for (std::size_t j = 0; j < size(); ++j) x.segment<2>(2 * static_cast<Eigen::Index>(j)) = coords[j];
    return x;
  }

  void set_stacked(const Eigen::VectorXd& x) {
    for (std::size_t j = 0; j < size(); ++j) coords[j] = x.segment<2>(2 * static_cast<Eigen::Index>(j));
  }
};

/// Sum of n_i |segment_i| over the polyline.
inline double optical_length(const PathConfiguration& pc) {
  const auto v = pc.vertices();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) total += pc.system.index_of_segment(i) * (v[i + 1] - v[i]).norm();
  return total;
}

/// Gradient of the optical length in the stacked chart coordinates.
inline Eigen::VectorXd optical_length_gradient(const PathConfiguration& pc) {
  const auto v = pc.vertices();
  Eigen::VectorXd g(2 * static_cast<Eigen::Index>(pc.size()));
  for (std::size_t j = 0; j < pc.size(); ++j) {
    const Vec3& x = v[j + 1];
    const Vec3 before = (x - v[j]).normalized();
    const Vec3 after = (v[j + 2] - x).normalized();
    const Vec3 g3 = pc.system.index_of_segment(j) * before - pc.system.index_of_segment(j + 1) * after;
    g.segment<2>(2 * static_cast<Eigen::Index>(j)) = pc.charts[j].tangents(pc.system.interfaces[j].surface, x).transpose() * g3;
  }
  return g;
}

/// Max-norm of the central-difference gradient (h = 1e-6) of the optical
/// length in surface coordinates.
inline double stationarity_residual(const PathConfiguration& pc, double h = 1e-6) {
  PathConfiguration probe = pc;
  const Eigen::VectorXd x0 = pc.stacked();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp(i) += h;
    xm(i) -= h;
    probe.set_stacked(xp);
    const double fp = optical_length(probe);
    probe.set_stacked(xm);
    const double fm = optical_length(probe);
    worst = std::max(worst, std::abs(fp - fm) / (2 * h));
  }
  return worst;
}

/// Per-interface deviation of the path's outgoing direction from the one the
/// local law (reflection or Snell-Descartes) prescribes; infinity when the law
/// has no solution there.
inline std::vector<double> law_residuals(const PathConfiguration& pc) {
  const auto v = pc.vertices();
  std::vector<double> out;
  for (std::size_t j = 0; j < pc.size(); ++j) {
    const auto& f = pc.system.interfaces[j];
    const Vec3& x = v[j + 1];
    const Vec3 before = (x - v[j]).normalized();
    const Vec3 after = (v[j + 2] - x).normalized();
    const Vec3 n = f.surface.gradient(x).normalized();
    try {
      const Vec3 expected = f.action == Action::Reflect ? reflect_direction(before, n)
                                                       : refract_direction(before, n, f.n_in, f.n_out);
      out.push_back((after - expected).lpNorm<Eigen::Infinity>());
    } catch (const Error&) {
      out.push_back(std::numeric_limits<double>::infinity());
    }
  }
  return out;
}

inline double max_law_residual(const PathConfiguration& pc) {
  double worst = 0.0;
  for (double r : law_residuals(pc)) worst = std::max(worst, r);
  return worst;
}

namespace detail {

/// Pulls p onto the surface along the gradient.
inline Vec3 project_onto(const ImplicitSurface& s, Vec3 p) {
  for (int it = 0; it < 100; ++it) {
    const Vec3 g = s.gradient(p);
    const double gg = g.squaredNorm();
    if (gg < limits::min_gradient * limits::min_gradient) break;
    const Vec3 step = s.value(p) / gg * g;
    p -= step;
    if (step.norm() < 1e-15 * std::max(1.0, p.norm())) return p;
  }
  if (std::abs(s.value(p)) < 1e-12 * std::max(1.0, p.norm())) return p;
  throw Error(ErrorCode::NoConvergence, "could not project a chord point onto the surface");
}

}  // namespace detail

/// Starting path: intersect the chord from the previous vertex toward M2 with
/// each surface in turn, falling back to projecting the chord midpoint.
inline PathConfiguration initial_configuration(const Vec3& m1, const Vec3& m2, const OpticalSystem& sys) {
  std::vector<Vec3> hits;
  Vec3 from = m1;
  for (std::size_t j = 0; j < sys.interfaces.size(); ++j) {
    const auto& s = sys.interfaces[j].surface;
    Vec3 x;
    try {
      x = intersect(Ray::from(from, m2 - from), s, 1e-9).point;
    } catch (const Error&) {
      x = detail::project_onto(s, 0.5 * (from + m2));
    }
    hits.push_back(x);
    from = x;
  }
  return PathConfiguration::from_points(m1, m2, sys, hits);
}

struct CharacteristicResult {
  double value = 0.0;  ///< V(M1, M2)
  PathConfiguration path;
  double gradient_norm = 0.0;
  double stationarity = 0.0;
  double law_residual = 0.0;
  int iterations = 0;

  void write_report(std::ostream& os) const {
    os << "V: " << format_real(value) << '\n';
    os << "gradient_max_norm: " << format_real(gradient_norm) << '\n';
    os << "stationarity_residual: " << format_real(stationarity) << '\n';
    os << "stationarity_step: " << format_real(1e-6) << '\n';
    os << "law_residual: " << format_real(law_residual) << '\n';
    os << "iterations: " << iterations << '\n';
    const auto v = path.vertices();
    for (std::size_t j = 1; j + 1 < v.size(); ++j) os << "hit_" << (j - 1) << ": " << format_vec(v[j]) << '\n';
  }
};

struct CharacteristicOptions {
  double gradient_tolerance = 1e-10;
  double law_tolerance = 1e-8;
  int max_iterations = 100;
  double hessian_step = 1e-6;
};

/// Damped Newton on the gradient of the optical length over the stacked
/// surface coordinates. Any stationary point is accepted.
inline CharacteristicResult characteristic_function(const Vec3& m1, const Vec3& m2, const OpticalSystem& sys,
                                                    std::optional<PathConfiguration> initial = std::nullopt,
                                                    const CharacteristicOptions& opts = {}) {
  sys.validate();
  for (std::size_t j = 0; j < sys.interfaces.size(); ++j) {
    const auto& s = sys.interfaces[j].surface;
    for (const Vec3& m : {m1, m2})
      if (std::abs(s.value(m)) / std::max(s.gradient(m).norm(), limits::min_gradient) < 1e-9)
        throw Error(ErrorCode::InvalidArgument, "endpoint lies on a surface").at_interface(static_cast<int>(j));
  }
  PathConfiguration pc = initial ? *initial : initial_configuration(m1, m2, sys);
  pc.system = sys;
  pc.m1 = m1;
  pc.m2 = m2;
  if (pc.size() != sys.interfaces.size()) throw Error(ErrorCode::InvalidArgument, "initial path does not match the system");
  pc.reanchor();

  CharacteristicResult r;
  const auto n = static_cast<Eigen::Index>(2 * pc.size());
  Eigen::VectorXd g = optical_length_gradient(pc);
  double gnorm = n ? g.lpNorm<Eigen::Infinity>() : 0.0;
  while (gnorm >= opts.gradient_tolerance) {
    if (r.iterations >= opts.max_iterations)
      throw Error(ErrorCode::NoConvergence, "gradient " + format_real(gnorm) + " after " + std::to_string(r.iterations) + " iterations");
    ++r.iterations;
    Eigen::MatrixXd hess(n, n);
    PathConfiguration probe = pc;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd xp = Eigen::VectorXd::Zero(n), xm = xp;
      xp(i) = opts.hessian_step;
      xm(i) = -opts.hessian_step;
      probe.set_stacked(xp);
      const Eigen::VectorXd gp = optical_length_gradient(probe);
      probe.set_stacked(xm);
      const Eigen::VectorXd gm = optical_length_gradient(probe);
      hess.col(i) = (gp - gm) / (2 * opts.hessian_step);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::VectorXd dir = hess.colPivHouseholderQr().solve(-g);
    if (!dir.allFinite()) dir = -g;

    bool accepted = false;
    for (const Eigen::VectorXd& d : {dir, Eigen::VectorXd(-g)}) {
      double alpha = 1.0;
      for (int ls = 0; ls < 40 && !accepted; ++ls, alpha *= 0.5) {
        try {
          probe.set_stacked(alpha * d);
          const Eigen::VectorXd gt = optical_length_gradient(probe);
          const double nt = gt.lpNorm<Eigen::Infinity>();
          if (std::isfinite(nt) && nt < gnorm) {
            pc = probe;
            pc.reanchor();
            g = optical_length_gradient(pc);
            gnorm = g.lpNorm<Eigen::Infinity>();
            accepted = true;
          }
        } catch (const Error&) {
        }
      }
      if (accepted) break;
    }
    if (!accepted) throw Error(ErrorCode::NoConvergence, "line search stalled at gradient " + format_real(gnorm));
  }
  r.gradient_norm = gnorm;
  r.value = optical_length(pc);
  r.stationarity = stationarity_residual(pc);
  r.law_residual = max_law_residual(pc);
  if (!(r.law_residual < opts.law_tolerance))
    throw Error(ErrorCode::NoConvergence, "stationary path violates the local laws by " + format_real(r.law_residual));
  r.path = std::move(pc);
  return r;
}

// ---------------------------------------------------------------------------
// Focusing mirrors.
// ---------------------------------------------------------------------------

struct MirrorDesign {
  Vec3 focus = Vec3::Zero();
  int epsilon = 1;
  double level = 0.0;
  Wavefront wavefront;  ///< reference wavefront the signed distances start from
  std::vector<double> k1;
  std::vector<double> k2;
  std::vector<Vec3> points;  ///< X(k), row-major with k1 outer
  std::vector<double> parameters;  ///< signed distance from Q(k) to X(k)

  std::size_t index(std::size_t i, std::size_t j) const { return i * k2.size() + j; }
  const Vec3& point(std::size_t i, std::size_t j) const { return points[index(i, j)]; }

  void write_csv(std::ostream& os) const {
    os << "k1,k2,x,y,z\n";
    for (std::size_t i = 0; i < k1.size(); ++i)
      for (std::size_t j = 0; j < k2.size(); ++j) {
        const Vec3& x = point(i, j);
        os << format_real(k1[i]) << ',' << format_real(k2[j]) << ',' << format_real(x.x()) << ',' << format_real(x.y())
           << ',' << format_real(x.z()) << '\n';
      }
  }
};

/// Root t of t + eps |Q + t u - M2| = C. The left side is nondecreasing in t;
/// its limit on the open end is u.(M2 - Q) - C, so a root exists iff that is
/// negative (eps = +1) or positive (eps = -1).
inline double solve_level_parameter(const Vec3& q, const Vec3& u, const Vec3& m2, int epsilon, double level) {
  const double eps = epsilon >= 0 ? 1.0 : -1.0;
  auto g = [&](double t) { return t + eps * (q + t * u - m2).norm() - level; };
  auto dg = [&](double t) {
    const Vec3 d = q + t * u - m2;
    const double len = d.norm();
    return 1.0 + (len > 0 ? eps * u.dot(d) / len : 0.0);
  };
  const double limit = u.dot(m2 - q) - level;
  if (eps > 0 ? !(limit < 0) : !(limit > 0))
    throw Error(ErrorCode::NoRoot, "level set misses the ray (asymptotic gap " + format_real(limit) + ")");

  const double scale = std::max({1.0, (q - m2).norm(), std::abs(level)});
  double lo = -scale, hi = scale;
  while (g(lo) > 0) {
    lo *= 2;
    if (lo < -limits::search_horizon) throw Error(ErrorCode::NoRoot, "no bracket below " + format_real(lo));
  }
  while (g(hi) < 0) {
    hi *= 2;
    if (hi > limits::search_horizon) throw Error(ErrorCode::NoRoot, "no bracket above " + format_real(hi));
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double v = g(t);
    if (v == 0.0) return t;
    (v < 0 ? lo : hi) = t;
    const double d = dg(t);
    double next = d > 0 ? t - v / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step < limits::root_tolerance || hi - lo < limits::root_tolerance) return t;
  }
  throw Error(ErrorCode::NoRoot, "level-set root did not converge");
}

struct MirrorOptions {
  int resolution = 21;
  std::optional<double> wavefront_constant;
  std::optional<double> step;
};

/// Samples the level set {X : s(X) + eps |X M2| = C}, s the signed distance
/// along each ray from the reference wavefront.
inline MirrorDesign design_focusing_mirror(const RayFamily& f, const Vec2& k0, const Vec3& m2, int epsilon, double level,
                                           const MirrorOptions& opts = {}) {
  if (epsilon != 1 && epsilon != -1) throw Error(ErrorCode::InvalidArgument, "epsilon must be +1 or -1");
  WavefrontOptions wo;
  wo.resolution = opts.resolution;
  wo.constant = opts.wavefront_constant;
  wo.step = opts.step;
  MirrorDesign md;
  md.focus = m2;
  md.epsilon = epsilon;
  md.level = level;
  md.wavefront = reconstruct_wavefront(f, k0, wo);
  md.k1 = md.wavefront.k1;
  md.k2 = md.wavefront.k2;
  for (std::size_t i = 0; i < md.k1.size(); ++i)
    for (std::size_t j = 0; j < md.k2.size(); ++j) {
      const Vec2 k(md.k1[i], md.k2[j]);
      const Vec3& q = md.wavefront.point(i, j);
      const Vec3 u = f.eval(k).direction();
      double t;
      try {
        t = solve_level_parameter(q, u, m2, epsilon, level);
      } catch (const Error& e) {
        throw e.at_parameter(k);
      }
      md.parameters.push_back(t);
      md.points.push_back(q + t * u);
    }
  return md;
}

/// Mirror point on L(k) for arbitrary k, with the phase integrated from the
/// design's base point.
inline Vec3 mirror_point(const MirrorDesign& md, const RayFamily& f, const Vec2& k) {
  const OrientedLine l = f.eval(k);
  const double phase = integrate_phase(f, md.wavefront.base, k);
  const Vec3 q = l.point_at(-(phase + md.wavefront.constant));
  return q + solve_level_parameter(q, l.direction(), md.focus, md.epsilon, md.level) * l.direction();
}

/// The reflected family of a design: lines through X(k) leaving along
/// eps (M2 - X), i.e. toward a real focus or away from a virtual one.
inline RayFamily focused_family(const MirrorDesign& md, const RayFamily& f) {
  return RayFamily::custom(
      [md, f](const Vec2& k) {
        const Vec3 x = mirror_point(md, f, k);
        return Ray::from(x, md.epsilon * (md.focus - x));
      },
      f.domain());
}

struct FocusReport {
  bool focused = false;
  double max_miss = 0.0;
  double tolerance = 0.0;
  std::size_t checked = 0;
};

struct FocusOptions {
  int stencil = 5;  ///< 5: cubic fit on 5x5 neighbours, 3: quadratic on 3x3
};

/// Normal of the sampled mirror at node (i, j) from a local least-squares
/// height fit in the frame spanned by the grid differences.
inline Vec3 fitted_normal(const MirrorDesign& md, std::size_t i, std::size_t j, int stencil = 5) {
  const int r = stencil / 2;
  const Vec3& x0 = md.point(i, j);
  const Vec3 t1 = md.point(i + 1, j) - md.point(i - 1, j);
  const Vec3 t2 = md.point(i, j + 1) - md.point(i, j - 1);
  Vec3 n = t1.cross(t2);
  if (n.norm() < 1e-14 * std::max(1.0, t1.norm() * t2.norm()))
    throw Error(ErrorCode::IllConditionedFit, "collapsed stencil");
  n.normalize();
  const Vec3 e1 = t1.normalized();
  const Vec3 e2 = n.cross(e1);
  const double scale = 0.5 * std::max(t1.norm(), t2.norm()) * r;

  const bool cubic = stencil >= 5;
  const int terms = cubic ? 10 : 6;
  const int count = stencil * stencil;
  Eigen::MatrixXd a(count, terms);
  Eigen::VectorXd z(count);
  int row = 0;
  for (int di = -r; di <= r; ++di)
    for (int dj = -r; dj <= r; ++dj, ++row) {
      const Vec3 d = md.point(i + di, j + dj) - x0;
      const double x = d.dot(e1) / scale, y = d.dot(e2) / scale;
      z(row) = d.dot(n) / scale;
      a(row, 0) = 1;
      a(row, 1) = x;
      a(row, 2) = y;
      a(row, 3) = x * x;
      a(row, 4) = x * y;
      a(row, 5) = y * y;
      if (cubic) {
        a(row, 6) = x * x * x;
        a(row, 7) = x * x * y;
        a(row, 8) = x * y * y;
        a(row, 9) = y * y * y;
      }
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-10 * sv(0))) throw Error(ErrorCode::IllConditionedFit, "singular height fit");
  const Eigen::VectorXd c = svd.solve(z);
  return (n - c(1) * e1 - c(2) * e2).normalized();
}

/// Reflects each L(k) off the fitted mirror at interior nodes and measures the
/// distance from M2 to the reflected line.
inline FocusReport verify_focus(const MirrorDesign& md, const RayFamily& f, double tol, const FocusOptions& opts = {}) {
  const int r = opts.stencil / 2;
  if (opts.stencil != 3 && opts.stencil != 5) throw Error(ErrorCode::InvalidArgument, "stencil must be 3 or 5");
  if (md.k1.size() < static_cast<std::size_t>(opts.stencil) || md.k2.size() < static_cast<std::size_t>(opts.stencil))
    throw Error(ErrorCode::IllConditionedFit, "grid smaller than the fitting stencil");
  FocusReport rep;
  rep.tolerance = tol;
  const auto ur = static_cast<std::size_t>(r);
  for (std::size_t i = ur; i + ur < md.k1.size(); ++i)
    for (std::size_t j = ur; j + ur < md.k2.size(); ++j) {
      const Vec2 k(md.k1[i], md.k2[j]);
      Vec3 n;
      try {
        n = fitted_normal(md, i, j, opts.stencil);
      } catch (const Error& e) {
        throw e.at_parameter(k);
      }
      const Vec3 u2 = reflect_direction(f.eval(k).direction(), n);
      const double miss = (md.focus - md.point(i, j)).cross(u2).norm();
      rep.max_miss = std::max(rep.max_miss, miss);
      ++rep.checked;
    }
  rep.focused = rep.max_miss < tol;
  return rep;
}

/// F_eps(X): signed distance from the design's reference wavefront to X along
/// the ray through X, plus eps |X M2|. The ray through X is located by Newton
/// on k starting from `guess`.
inline double level_value(const MirrorDesign& md, const RayFamily& f, const Vec3& x, const Vec2& guess) {
  Vec2 k = guess;
  const auto [e1, e2] = orthonormal_basis(f.eval(guess).direction());
  auto offset = [&](const Vec2& kk) {
    const OrientedLine l = f.eval(kk);
    const Vec3 d = x - l.foot();
    const Vec3 perp = d - d.dot(l.direction()) * l.direction();
    return Vec2(perp.dot(e1), perp.dot(e2));
  };
  const double h = f.default_step();
  for (int it = 0; it < 50; ++it) {
    const Vec2 r = offset(k);
    if (r.norm() < 1e-14 * std::max(1.0, x.norm())) break;
    Eigen::Matrix2d jac;
    for (int c = 0; c < 2; ++c) {
      Vec2 kp = k, km = k;
      kp(c) += h;
      km(c) -= h;
      jac.col(c) = (offset(kp) - offset(km)) / (2 * h);
    }
    const Vec2 step = jac.colPivHouseholderQr().solve(r);
    k -= step;
    if (step.norm() < 1e-15 * std::max(1.0, k.norm())) break;
  }
  const OrientedLine l = f.eval(k);
  const double phase = integrate_phase(f, md.wavefront.base, k);
  const double s = (x - l.foot()).dot(l.direction()) + phase + md.wavefront.constant;
  return s + md.epsilon * (x - md.focus).norm();
}

}  // namespace oline
