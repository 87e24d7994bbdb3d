#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace oline {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

namespace limits {
/// Tolerance on |u| = 1 and q·u = 0 for canonical lines.
inline constexpr double unit_norm = 1e-12;
/// Stereographic charts stay this far away from their projection pole (in u3).
inline constexpr double chart_margin = 1e-6;
/// Rays with |u·n| below this are treated as grazing the surface.
inline constexpr double transverse = 1e-6;
inline constexpr double min_gradient = 1e-10;
inline constexpr double search_horizon = 1e6;
inline constexpr double root_tolerance = 1e-12;
}  // namespace limits

/// Central-difference step for a problem of the given characteristic length.
inline double fd_step(double length_scale) { return 1e-5 * std::max(1.0, length_scale); }

/// Orthonormal pair (e1, e2) completing the unit vector n to a right-handed frame.
inline std::pair<Vec3, Vec3> orthonormal_basis(const Vec3& n) {
  const Vec3 seed = std::abs(n.x()) < 0.6 ? Vec3::UnitX() : (std::abs(n.y()) < 0.6 ? Vec3::UnitY() : Vec3::UnitZ());
  Vec3 e1 = (seed - seed.dot(n) * n).normalized();
  Vec3 e2 = n.cross(e1);
  return {e1, e2};
}

/// Fixed 17-significant-digit rendering used by every text and CSV output.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_vec(const Vec3& v) {
  return format_real(v.x()) + " " + format_real(v.y()) + " " + format_real(v.z());
}

}  // namespace oline
