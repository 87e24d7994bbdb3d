#pragma once

// The 4-manifold of oriented straight lines in Euclidean 3-space.
//
// A line is stored canonically as (u, q): its unit direction and its foot
// point, the point of the line closest to the origin. The symplectic form is
//
//     omega(v1, v2) = dq1 . du2 - dq2 . du1,
//
// i.e. omega = d(theta) with theta = q . du. Every module uses this sign.

#include "oline/common.hpp"
#include "oline/error.hpp"

#include <Eigen/SVD>

namespace oline {

class OrientedLine {
 public:
  const Vec3& direction() const noexcept { return u_; }
  const Vec3& foot() const noexcept { return q_; }

  /// Point at signed parameter s measured from the foot point.
  Vec3 point_at(double s) const { return q_ + s * u_; }
  /// Signed parameter of the orthogonal projection of p onto the line.
  double parameter_of(const Vec3& p) const { return p.dot(u_); }
  double distance_to(const Vec3& p) const { return (p - q_).cross(u_).norm(); }

  friend bool operator==(const OrientedLine&, const OrientedLine&) = default;

  friend OrientedLine line_through(const Vec3& p, const Vec3& u);

 private:
  OrientedLine(const Vec3& u, const Vec3& q) : u_(u), q_(q) {}
  Vec3 u_;
  Vec3 q_;
};

/// The line through p with direction u/|u|.
inline OrientedLine line_through(const Vec3& p, const Vec3& u) {
  const double len = u.norm();
  if (!(len >= 1e-12)) throw Error(ErrorCode::ZeroDirection, "direction norm " + format_real(len));
  const Vec3 d = u / len;
  return OrientedLine(d, p - p.dot(d) * d);
}

inline OrientedLine reverse(const OrientedLine& line) { return line_through(line.foot(), -line.direction()); }

inline bool approx_equal(const OrientedLine& a, const OrientedLine& b, double tol) {
  return (a.direction() - b.direction()).lpNorm<Eigen::Infinity>() <= tol &&
         (a.foot() - b.foot()).lpNorm<Eigen::Infinity>() <= tol;
}

/// A half-line: an oriented line together with the signed parameter of its
/// origin. Keeping the origin as a parameter makes it move smoothly with the
/// line, which the Jacobian harnesses rely on.
struct Ray {
  OrientedLine line;
  double start = 0.0;

  Vec3 origin() const { return line.point_at(start); }
  const Vec3& direction() const { return line.direction(); }
  Vec3 at(double t) const { return line.point_at(start + t); }

  static Ray from(const Vec3& p, const Vec3& u) {
    OrientedLine l = line_through(p, u);
    return Ray{l, l.parameter_of(p)};
  }
};

/// Tangent vector to the line manifold at a line.
struct LineVariation {
  Vec3 du = Vec3::Zero();
  Vec3 dq = Vec3::Zero();

  bool is_tangent_at(const OrientedLine& l, double tol = 1e-10) const {
    return std::abs(l.direction().dot(du)) <= tol &&
           std::abs(l.foot().dot(du) + l.direction().dot(dq)) <= tol;
  }
};

/// Variation of a tangent at `l` obtained by sliding the reference point by
/// `s` along the line (dq + s du + u ds); the pairing does not see it.
inline LineVariation slide(const OrientedLine& l, const LineVariation& v, double s, double ds) {
  return {v.du, v.dq + s * v.du + ds * l.direction()};
}

inline double symplectic_pairing(const OrientedLine& /*at*/, const LineVariation& v1, const LineVariation& v2) {
  return v1.dq.dot(v2.du) - v2.dq.dot(v1.du);
}

/// Central-difference tangent of a smooth curve s -> line at s.
template <class Curve>
LineVariation line_derivative(const Curve& curve, double s, double h) {
  const OrientedLine plus = curve(s + h);
  const OrientedLine minus = curve(s - h);
  return {(plus.direction() - minus.direction()) / (2 * h), (plus.foot() - minus.foot()) / (2 * h)};
}

// ---------------------------------------------------------------------------
// Stereographic charts of T*S^2.
// ---------------------------------------------------------------------------

enum class Chart { North, South };

constexpr const char* to_string(Chart c) { return c == Chart::North ? "NORTH" : "SOUTH"; }

struct ChartPoint {
  Chart chart = Chart::North;
  Vec2 a = Vec2::Zero();  ///< stereographic coordinates of u
  Vec2 b = Vec2::Zero();  ///< covector components in the cobasis da_i

  Vec4 coords() const { return {a.x(), a.y(), b.x(), b.y()}; }
  static ChartPoint from_coords(Chart chart, const Vec4& c) { return {chart, c.head<2>(), c.tail<2>()}; }
};

inline bool chart_valid(Chart chart, const Vec3& u) {
  return chart == Chart::North ? u.z() < 1.0 - limits::chart_margin : u.z() > -1.0 + limits::chart_margin;
}

/// The chart whose pole is farthest from u.
inline Chart preferred_chart(const Vec3& u) { return u.z() <= 0.0 ? Chart::North : Chart::South; }

namespace detail {

inline Vec3 stereo_inverse(Chart chart, const Vec2& a) {
  const double s = a.squaredNorm();
  const double d = s + 1.0;
  const double z = chart == Chart::North ? (s - 1.0) / d : (1.0 - s) / d;
  return {2.0 * a.x() / d, 2.0 * a.y() / d, z};
}

/// Columns are du/da_1 and du/da_2.
inline Eigen::Matrix<double, 3, 2> stereo_tangents(Chart chart, const Vec2& a) {
  const double d = a.squaredNorm() + 1.0;
  const double sign = chart == Chart::North ? 1.0 : -1.0;
  Eigen::Matrix<double, 3, 2> e;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) e(j, i) = (i == j ? 2.0 / d : 0.0) - 4.0 * a(i) * a(j) / (d * d);
    e(2, i) = sign * 4.0 * a(i) / (d * d);
  }
  return e;
}

}  // namespace detail

/// Chart coordinates of a line. `origin` is the point O defining the covector
/// b_i = OP . du/da_i; any point P of the line gives the same value.
inline ChartPoint to_chart(const OrientedLine& l, Chart chart, const Vec3& origin = Vec3::Zero()) {
  const Vec3& u = l.direction();
  if (!chart_valid(chart, u))
    throw Error(ErrorCode::ChartDomain, std::string("direction too close to the pole of chart ") + to_string(chart));
  const double denom = chart == Chart::North ? 1.0 - u.z() : 1.0 + u.z();
  const Vec2 a(u.x() / denom, u.y() / denom);
  const auto e = detail::stereo_tangents(chart, a);
  const Vec3 op = l.foot() - origin;
  return {chart, a, Vec2(op.dot(e.col(0)), op.dot(e.col(1)))};
}

inline OrientedLine from_chart(const ChartPoint& c, const Vec3& origin = Vec3::Zero()) {
  const Vec3 u = detail::stereo_inverse(c.chart, c.a);
  const auto e = detail::stereo_tangents(c.chart, c.a);
  const Eigen::Matrix2d gram = e.transpose() * e;
  const Vec3 p = origin + e * gram.ldlt().solve(c.b);
  return line_through(p, u);
}

/// Constant matrix of omega in chart coordinates (a1, a2, b1, b2):
/// omega(X, Y) = X^T Omega Y = sum_i (Xb_i Ya_i - Yb_i Xa_i).
inline Mat4 chart_symplectic_matrix() {
  Mat4 m = Mat4::Zero();
  m(0, 2) = -1.0;
  m(1, 3) = -1.0;
  m(2, 0) = 1.0;
  m(3, 1) = 1.0;
  return m;
}

/// 4x4 central-difference Jacobian of a map on lines, expressed in the
/// preferred charts of the input line and of its image.
template <class LineMap>
Mat4 chart_jacobian(const LineMap& map, const OrientedLine& line, double h) {
  const Chart in = preferred_chart(line.direction());
  const Chart out = preferred_chart(map(line).direction());
  const Vec4 base = to_chart(line, in).coords();
  Mat4 jac;
  for (int i = 0; i < 4; ++i) {
    Vec4 plus = base, minus = base;
    plus(i) += h;
    minus(i) -= h;
    const Vec4 fp = to_chart(map(from_chart(ChartPoint::from_coords(in, plus))), out).coords();
    const Vec4 fm = to_chart(map(from_chart(ChartPoint::from_coords(in, minus))), out).coords();
    jac.col(i) = (fp - fm) / (2 * h);
  }
  return jac;
}

/// max |J^T Omega J - scale * Omega| over the 16 entries.
inline double symplectic_deviation(const Mat4& jac, double scale) {
  const Mat4 omega = chart_symplectic_matrix();
  return (jac.transpose() * omega * jac - scale * omega).cwiseAbs().maxCoeff();
}

/// Least-squares factor s with J^T Omega J ~ s Omega.
inline double symplectic_scale(const Mat4& jac) {
  const Mat4 omega = chart_symplectic_matrix();
  return (jac.transpose() * omega * jac).cwiseProduct(omega).sum() / omega.squaredNorm();
}

/// 4x2 chart Jacobian of a two-parameter map k -> line at k.
template <class Family>
Eigen::Matrix<double, 4, 2> chart_jacobian_2(const Family& eval, const Vec2& k, double h) {
  const Chart chart = preferred_chart(eval(k).direction());
  Eigen::Matrix<double, 4, 2> jac;
  for (int i = 0; i < 2; ++i) {
    Vec2 kp = k, km = k;
    kp(i) += h;
    km(i) -= h;
    jac.col(i) = (to_chart(eval(kp), chart).coords() - to_chart(eval(km), chart).coords()) / (2 * h);
  }
  return jac;
}

}  // namespace oline
