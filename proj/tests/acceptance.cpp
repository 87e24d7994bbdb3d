// Acceptance suite: one test per criterion, summarised as PASS/FAIL lines.

#include "oline/oline.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace oline;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string>& notes() {
  static std::map<std::string, std::string> n;
  return n;
}

void note(const std::string& criterion, const std::string& key, double value) {
  auto& s = notes()[criterion];
  if (!s.empty()) s += ", ";
  s += key + "=" + format_real(value);
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

class Summary : public testing::EmptyTestEventListener {
  void OnTestEnd(const testing::TestInfo& info) override {
    const std::string name = info.name();
    const std::string id = name.substr(0, name.find('_'));
    std::cout << (info.result()->Passed() ? "PASS " : "FAIL ") << id << ' ' << name.substr(name.find('_') + 1);
    if (const auto it = notes().find(id); it != notes().end()) std::cout << " (" << it->second << ')';
    std::cout << std::endl;
  }
};

std::mt19937_64 gen(20240611);
double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
Vec3 random_unit() {
  Vec3 v;
  do v = Vec3(uni(-1, 1), uni(-1, 1), uni(-1, 1));
  while (v.norm() < 0.1 || v.norm() > 1);
  return v.normalized();
}

ImplicitSurface random_surface(int kind) {
  switch (kind % 4) {
    case 0: return ImplicitSurface::plane(random_unit(), uni(-1, 1));
    case 1: return ImplicitSurface::sphere(Vec3(uni(-1, 1), uni(-1, 1), uni(-1, 1)), uni(0.5, 2.0));
    case 2: {
      Mat3 a;
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) a(i, j) = a(j, i) = uni(-0.3, 0.3);
      const Vec3 x0(uni(-1, 1), uni(-1, 1), uni(-1, 1));
      const Vec3 b = 1.5 * random_unit();
      return ImplicitSurface::quadric(a, b, -(x0.dot(a * x0) + b.dot(x0)));
    }
    default: return ImplicitSurface::sinusoid(uni(0.02, 0.3), Vec2(uni(-2, 2), uni(-2, 2)), uni(-1, 1));
  }
}

// A random ray meeting `s` near a random surface point, at least `min_cos`
// away from grazing there.
std::optional<Ray> random_ray_onto(const ImplicitSurface& s, double min_cos) {
  Vec3 x(uni(-1, 1), uni(-1, 1), uni(-1, 1));
  for (int it = 0; it < 50; ++it) {
    const Vec3 g = s.gradient(x);
    x -= s.value(x) * g / g.squaredNorm();
  }
  if (std::abs(s.value(x)) > 1e-12) return std::nullopt;
  const Vec3 n = s.gradient(x).normalized();
  Vec3 u = random_unit();
  if (std::abs(u.dot(n)) < min_cos) return std::nullopt;
  return Ray::from(x - 2.0 * u, u);
}

struct JacobianSample {
  double deviation;
  double ratio;
};

// Chart Jacobian of the line map of one interface around the incoming line.
JacobianSample interface_jacobian(const Ray& incoming, const Interface& face, double expected) {
  const double start = incoming.start;
  auto map = [&](const OrientedLine& l) { return apply_interface(Ray{l, start}, face, 0.0).line; };
  const Mat4 jac = chart_jacobian(map, incoming.line, 1e-5);
  return {symplectic_deviation(jac, expected), symplectic_scale(jac)};
}

const Domain tiny{Vec2(-0.1, -0.1), Vec2(0.1, 0.1)};

}  // namespace

TEST(Acceptance, C1_ReflectionSymplecticity) {
  Stopwatch sw;
  int samples = 0, kind = 0;
  double worst = 0.0;
  while (samples < 200) {
    const ImplicitSurface s = random_surface(kind);
    const auto ray = random_ray_onto(s, 0.2);
    if (!ray) continue;
    try {
      worst = std::max(worst, interface_jacobian(*ray, Interface::mirror(s), 1.0).deviation);
    } catch (const Error&) {
      continue;  // grazing at an earlier crossing
    }
    ++samples;
    ++kind;
  }
  note("C1", "pairs", samples);
  note("C1", "max_deviation", worst);
  note("C1", "seconds", sw.seconds());
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(sw.seconds(), 10.0);
}

TEST(Acceptance, C2_RefractionScaledSymplecticity) {
  Stopwatch sw;
  double worst = 0.0;
  int tir_checked = 0, tir_wrong = 0;
  for (const auto& [n1, n2] : {std::pair{1.0, 1.5}, std::pair{1.5, 1.0}, std::pair{1.0, 2.4}}) {
    int samples = 0, kind = 0;
    while (samples < 200) {
      const ImplicitSurface s = random_surface(kind);
      const auto ray = random_ray_onto(s, 0.2);
      if (!ray) continue;
      Intersection hit;
      try {
        hit = intersect(*ray, s);
      } catch (const Error&) {
        continue;
      }
      const double sin1 = ray->direction().cross(hit.normal).norm();
      const double critical = n2 / n1;
      // Total internal reflection must be reported exactly beyond the critical angle.
      if (std::abs(sin1 - critical) > 1e-9) {
        bool rejected = false;
        try {
          refract_line(*ray, s, n1, n2);
        } catch (const Error& e) {
          rejected = e.code() == ErrorCode::TotalInternalReflection;
        }
        ++tir_checked;
        if (rejected != (sin1 >= critical)) ++tir_wrong;
      }
      if (sin1 > 0.95 * critical) continue;  // the map is singular at the critical angle
      try {
        worst = std::max(worst, interface_jacobian(*ray, Interface::refractor(s, n1, n2), n1 / n2).deviation);
      } catch (const Error&) {
        continue;
      }
      ++samples;
      ++kind;
    }
  }
  // Explicit rays straddling the critical angle of a flat 1.5 -> 1 interface.
  const auto flat = ImplicitSurface::plane({0, 0, 1}, 0);
  for (double sin1 : {0.5, 0.66, 0.6666, 2.0 / 3.0 + 1e-6, 0.7, 0.99}) {
    const Ray r = Ray::from({0, 0, 1}, Vec3(sin1, 0, -std::sqrt(1 - sin1 * sin1)));
    bool rejected = false;
    try {
      refract_line(r, flat, 1.5, 1.0);
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::TotalInternalReflection;
    }
    ++tir_checked;
    if (rejected != (sin1 >= 2.0 / 3.0)) ++tir_wrong;
  }
  note("C2", "max_deviation", worst);
  note("C2", "tir_checked", tir_checked);
  note("C2", "tir_misclassified", tir_wrong);
  note("C2", "seconds", sw.seconds());
  EXPECT_LT(worst, 1e-6);
  EXPECT_EQ(tir_wrong, 0);
  EXPECT_LT(sw.seconds(), 10.0);
}

TEST(Acceptance, C3_RectangularThroughDevice) {
  Stopwatch sw;
  Mat3 bowl = Mat3::Zero();
  bowl(0, 0) = bowl(1, 1) = 0.02;
  const OpticalSystem device{{Interface::refractor(ImplicitSurface::sphere(Vec3::Zero(), 10.0), 1.0, 1.5),
                              Interface::mirror(ImplicitSurface::sinusoid(0.05, Vec2(1.5, 0.7), -2.0), 1.5),
                              Interface::mirror(ImplicitSurface::quadric(bowl, Vec3(0, 0, 1), -3.0), 1.5),
                              Interface::refractor(ImplicitSurface::plane({0, 0, 1}, -5.0), 1.5, 1.33)},
                             1.0};
  const auto point = RayFamily::point_source(Vec3(0, 0, 15), {0, 0, -1}, tiny);
  const auto normals = RayFamily::normal_congruence(ImplicitSurface::sphere(Vec3(0, 0, 16), 1.0), Vec3(0, 0, 12),
                                                    {0, 0, 1}, Domain{Vec2(-0.05, -0.05), Vec2(0.05, 0.05)});
  GridOptions go;
  go.resolution = 21;
  const auto a = is_rectangular(transform_family(point, device), go, 1e-5);
  const auto b = is_rectangular(transform_family(normals, device), go, 1e-5);
  note("C3", "point_source_max_defect", a.grid.max_abs_defect);
  note("C3", "normal_congruence_max_defect", b.grid.max_abs_defect);
  note("C3", "seconds", sw.seconds());
  EXPECT_LT(a.grid.max_abs_defect, 1e-5);
  EXPECT_LT(b.grid.max_abs_defect, 1e-5);
  EXPECT_LT(sw.seconds(), 30.0);
}

TEST(Acceptance, C4_SkewLinesNotRectangular) {
  // Lines from (s,0,0) to (0,t,1); the unit-scale configuration is centred at
  // s = t = 1. Hand oracle: st / (1 + s^2 + t^2)^(3/2).
  const auto f = RayFamily::two_skew_lines({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {0, 1, 0}, Domain{Vec2(0.5, 0.5), Vec2(1.5, 1.5)});
  const Vec2 centre = f.domain().center();
  const double value = defect(f, centre);
  const double oracle = 1.0 / std::pow(3.0, 1.5);
  note("C4", "defect", value);
  note("C4", "oracle", oracle);
  EXPECT_GT(std::abs(value), 0.1);
  EXPECT_LT(std::abs(value - oracle) / oracle, 5e-4);  // three significant digits
  EXPECT_FALSE(is_rectangular(f).rectangular);
}

TEST(Acceptance, C5_WavefrontOrthogonality) {
  double sphere_err = 0, plane_err = 0, reflected_sphere_err = 0, reflected_plane_err = 0, ortho = 0;
  const Domain d{Vec2(-0.2, -0.2), Vec2(0.2, 0.2)};
  {
    const Vec3 apex(0.3, -0.2, 0.5);
    WavefrontOptions wo;
    wo.constant = -1.0;
    const auto w = reconstruct_wavefront(RayFamily::point_source(apex, {0, 0.2, 1}, d), Vec2::Zero(), wo);
    const double r0 = (w.point(10, 10) - apex).norm();
    for (const Vec3& q : w.points) sphere_err = std::max(sphere_err, std::abs((q - apex).norm() - r0));
    ortho = std::max(ortho, w.orthogonality);
  }
  {
    const Vec3 dir = Vec3(0.2, -0.1, 1).normalized();
    const auto w = reconstruct_wavefront(RayFamily::collimated(dir, Vec3(0.5, 0.5, 0.5), d), Vec2(0.05, 0.0));
    const double level = w.point(0, 0).dot(dir);
    for (const Vec3& q : w.points) plane_err = std::max(plane_err, std::abs(q.dot(dir) - level));
    ortho = std::max(ortho, w.orthogonality);
  }
  {
    // Reflected in the floor, a point source at (0,0,2) looks like one at (0,0,-2).
    const OpticalSystem floor{{Interface::mirror(ImplicitSurface::plane({0, 0, 1}, 0))}, 1.0};
    const auto f = transform_family(RayFamily::point_source(Vec3(0.1, 0, 2), {0.2, 0, -1}, d), floor);
    const auto w = reconstruct_wavefront(f, Vec2::Zero());
    const Vec3 image(0.1, 0, -2);
    const double r0 = (w.point(10, 10) - image).norm();
    for (const Vec3& q : w.points) reflected_sphere_err = std::max(reflected_sphere_err, std::abs((q - image).norm() - r0));
    ortho = std::max(ortho, w.orthogonality);
  }
  {
    const Vec3 n = Vec3(0.1, 0.2, 1).normalized();
    const OpticalSystem tilted{{Interface::mirror(ImplicitSurface::plane(n, -1.0))}, 1.0};
    const Vec3 dir(0, 0, -1);
    const auto f = transform_family(RayFamily::collimated(dir, Vec3(0, 0, 3), d), tilted);
    const Vec3 out = dir - 2 * dir.dot(n) * n;
    const auto w = reconstruct_wavefront(f, Vec2::Zero());
    const double level = w.point(0, 0).dot(out);
    for (const Vec3& q : w.points) reflected_plane_err = std::max(reflected_plane_err, std::abs(q.dot(out) - level));
    ortho = std::max(ortho, w.orthogonality);
  }
  note("C5", "sphere_err", sphere_err);
  note("C5", "plane_err", plane_err);
  note("C5", "reflected_sphere_err", reflected_sphere_err);
  note("C5", "reflected_plane_err", reflected_plane_err);
  note("C5", "max_orthogonality", ortho);
  EXPECT_LT(sphere_err, 1e-7);
  EXPECT_LT(plane_err, 1e-7);
  EXPECT_LT(reflected_sphere_err, 1e-7);
  EXPECT_LT(reflected_plane_err, 1e-7);
  EXPECT_LT(ortho, 1e-6);
}

TEST(Acceptance, C6_MirrorDesign) {
  // Ellipsoid with foci A = 0 and M2 = (1,0,0), |AX| + |XM2| = 3; on the unit
  // reference sphere the signed distance is |AX| - 1, so the level is 2.
  const auto source = RayFamily::point_source(Vec3::Zero(), {0, 0, 1}, tiny);
  MirrorOptions mo;
  mo.wavefront_constant = -1.0;
  const Vec3 m2(1, 0, 0);
  const auto ell = design_focusing_mirror(source, Vec2::Zero(), m2, 1, 2.0, mo);
  double ell_err = 0;
  for (std::size_t i = 0; i < ell.k1.size(); ++i)
    for (std::size_t j = 0; j < ell.k2.size(); ++j) {
      const Vec3 u = source.eval(Vec2(ell.k1[i], ell.k2[j])).direction();
      const double r = (9.0 - 1.0) / (2 * (3.0 - u.dot(m2)));
      ell_err = std::max(ell_err, (ell.point(i, j) - r * u).norm());
    }
  const auto ell_focus = verify_focus(ell, source, 1e-6);

  // Paraboloid: beam along e3 from z = 0, focus (0,0,2), level 3: z = (5 - r^2) / 2.
  const auto beam = RayFamily::collimated({0, 0, 1}, Vec3::Zero(), Domain{Vec2(-0.2, -0.2), Vec2(0.2, 0.2)});
  const auto par = design_focusing_mirror(beam, Vec2::Zero(), Vec3(0, 0, 2), 1, 3.0);
  double par_err = 0;
  for (const Vec3& x : par.points) par_err = std::max(par_err, std::abs(x.z() - (5 - x.x() * x.x() - x.y() * x.y()) / 2));
  const auto par_focus = verify_focus(par, beam, 1e-6);

  // Focus on the axis beyond the seed point P = (0,0,1): the level set through
  // P exists only with the minus sign.
  const Vec3 beyond(0, 0, 3);
  bool plus_rejected = false;
  try {
    const auto md = design_focusing_mirror(source, Vec2::Zero(), beyond, 1, 2.0, mo);
    plus_rejected = !verify_focus(md, source, 1e-6).focused;
  } catch (const Error& e) {
    plus_rejected = e.code() == ErrorCode::NoRoot;
  }
  const auto virt = design_focusing_mirror(source, Vec2::Zero(), beyond, -1, -2.0, mo);
  const auto virt_focus = verify_focus(virt, source, 1e-6);

  note("C6", "ellipsoid_err", ell_err);
  note("C6", "ellipsoid_miss", ell_focus.max_miss);
  note("C6", "paraboloid_err", par_err);
  note("C6", "paraboloid_miss", par_focus.max_miss);
  note("C6", "virtual_minus_miss", virt_focus.max_miss);
  note("C6", "virtual_plus_rejected", plus_rejected ? 1 : 0);
  EXPECT_LT(ell_err, 1e-7);
  EXPECT_LT(par_err, 1e-7);
  EXPECT_TRUE(ell_focus.focused);
  EXPECT_TRUE(par_focus.focused);
  EXPECT_TRUE(plus_rejected);
  EXPECT_TRUE(virt_focus.focused);
}

namespace {

OpticalSystem random_system(int kind) {
  auto tilted = [](double height) { return ImplicitSurface::plane(Vec3(uni(-0.15, 0.15), uni(-0.15, 0.15), 1), height); };
  auto bulge = [](double height) { return ImplicitSurface::sphere(Vec3(uni(-0.2, 0.2), uni(-0.2, 0.2), height - 6), 6.0); };
  auto ripple = [](double height) { return ImplicitSurface::sinusoid(uni(0.01, 0.05), Vec2(uni(-1, 1), uni(-1, 1)), height); };
  const double n1 = uni(1.2, 1.8), n2 = uni(1.2, 1.8);
  switch (kind % 5) {
    case 0: return {{Interface::refractor(bulge(0), 1.0, n1)}, 1.0};
    case 1: return {{Interface::refractor(tilted(0), 1.0, n1), Interface::refractor(ripple(-1), n1, n2)}, 1.0};
    case 2: {
      const auto top = tilted(0);
      return {{Interface::refractor(top, 1.0, n1), Interface::mirror(ripple(-1.5), n1), Interface::refractor(top, n1, 1.0)}, 1.0};
    }
    case 3: return {{Interface::mirror(bulge(0))}, 1.0};
    default:
      return {{Interface::refractor(tilted(0), 1.0, n1), Interface::refractor(bulge(-1), n1, n2),
               Interface::refractor(tilted(-2), n2, 1.0)},
              1.0};
  }
}

}  // namespace

TEST(Acceptance, C7_CharacteristicFunction) {
  Stopwatch sw;
  const OpticalSystem floor{{Interface::mirror(ImplicitSurface::plane({0, 0, 1}, 0))}, 1.0};
  const auto mirror = characteristic_function({0, 0, 1}, {1, 0, 1}, floor);
  const double v_err = std::abs(mirror.value - std::sqrt(5.0));

  // Laws => stationary: traced paths. Stationary => laws: solved paths. Off
  // the solution both residuals must be visibly nonzero.
  double traced_stat = 0, traced_law = 0, solved_stat = 0, solved_law = 0, v_mismatch = 0;
  double off_min_stat = 1e300, off_min_law = 1e300;
  for (int trial = 0; trial < 50; ++trial) {
    const auto sys = random_system(trial);
    const Vec3 m1(uni(-0.3, 0.3), uni(-0.3, 0.3), 2.0);
    const TraceResult tr = propagate_system(Ray::from(m1, Vec3(uni(-0.15, 0.15), uni(-0.15, 0.15), -1)), sys);
    const Vec3 m2 = tr.ray_out.at(1.5);
    std::vector<Vec3> hits;
    for (const auto& h : tr.hits) hits.push_back(h.point);
    const auto traced = PathConfiguration::from_points(m1, m2, sys, hits);
    traced_stat = std::max(traced_stat, stationarity_residual(traced));
    traced_law = std::max(traced_law, max_law_residual(traced));

    const auto r = characteristic_function(m1, m2, sys);
    solved_stat = std::max(solved_stat, r.stationarity);
    solved_law = std::max(solved_law, r.law_residual);
    v_mismatch = std::max(v_mismatch, std::abs(r.value - (tr.optical_length + 1.5 * sys.interfaces.back().index_after())));

    auto moved = r.path;
    moved.coords[static_cast<std::size_t>(trial) % moved.size()] += Vec2(uni(-1e-2, 1e-2), uni(-1e-2, 1e-2));
    off_min_stat = std::min(off_min_stat, stationarity_residual(moved));
    off_min_law = std::min(off_min_law, max_law_residual(moved));
  }
  note("C7", "V_error", v_err);
  note("C7", "traced_stationarity", traced_stat);
  note("C7", "traced_law", traced_law);
  note("C7", "solved_stationarity", solved_stat);
  note("C7", "solved_law", solved_law);
  note("C7", "V_vs_trace", v_mismatch);
  note("C7", "perturbed_min_stationarity", off_min_stat);
  note("C7", "perturbed_min_law", off_min_law);
  note("C7", "seconds", sw.seconds());
  EXPECT_LT(v_err, 1e-9);
  EXPECT_LT(traced_stat, 1e-8);
  EXPECT_LT(traced_law, 1e-8);
  EXPECT_LT(solved_stat, 1e-8);
  EXPECT_LT(solved_law, 1e-8);
  EXPECT_LT(v_mismatch, 1e-9);
  EXPECT_GT(off_min_stat, 1e-8);
  EXPECT_GT(off_min_law, 1e-8);
  EXPECT_LT(sw.seconds(), 20.0);
}

TEST(Acceptance, C8_DifferentialIdentities) {
  // A ray moving with a parameter s: its hit P(s), the incoming and outgoing
  // directions, and points M1, M2 sliding on the two lines at distances l1(s),
  // l2(s) from P.
  double worst_tangent = 0, worst_length = 0;
  int reflections = 0, refractions = 0, kind = 0;
  const double h = 1e-5;
  while (reflections < 100 || refractions < 100) {
    const bool reflect = reflections < 100;
    const ImplicitSurface s = random_surface(kind);
    const auto base = random_ray_onto(s, 0.3);
    if (!base) continue;
    const Vec3 da = 0.3 * random_unit(), db = 0.3 * random_unit();
    const double n1 = reflect ? 1.0 : uni(1.0, 1.3), n2 = reflect ? 1.0 : uni(1.4, 2.0);
    const double a1 = uni(0.5, 2), b1 = uni(-1, 1), a2 = uni(0.5, 2), b2 = uni(-1, 1);
    struct State {
      Vec3 p, u1, u2, m1, m2;
      double length;
    };
    auto at = [&](double t) {
      const Ray r = Ray::from(base->origin() + t * da, base->direction() + t * db);
      const Transfer tf = reflect ? reflect_line(r, s) : refract_line(r, s, n1, n2);
      const double l1 = a1 + b1 * t, l2 = a2 + b2 * t;
      const Vec3 p = tf.hit.point, u1 = r.direction(), u2 = tf.line.direction();
      return State{p, u1, u2, p - l1 * u1, p + l2 * u2, n1 * l1 + n2 * l2};
    };
    State c{}, plus{}, minus{};
    try {
      c = at(0);
      plus = at(h);
      minus = at(-h);
    } catch (const Error&) {
      continue;
    }
    const Vec3 dp = (plus.p - minus.p) / (2 * h);
    const Vec3 dm1 = (plus.m1 - minus.m1) / (2 * h);
    const Vec3 dm2 = (plus.m2 - minus.m2) / (2 * h);
    const double dlen = (plus.length - minus.length) / (2 * h);
    worst_tangent = std::max(worst_tangent, std::abs((n1 * c.u1 - n2 * c.u2).dot(dp)));
    worst_length = std::max(worst_length, std::abs(n2 * c.u2.dot(dm2) - n1 * c.u1.dot(dm1) - dlen));
    ++(reflect ? reflections : refractions);
    ++kind;
  }
  note("C8", "max_tangent_identity", worst_tangent);
  note("C8", "max_length_identity", worst_length);
  EXPECT_LT(worst_tangent, 1e-7);
  EXPECT_LT(worst_length, 1e-6);
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Acceptance, C9_Determinism) {
  const std::map<std::string, std::vector<std::string>> runs = {
      {"point_source", {"trace", "defect", "wavefront"}},
      {"skew_lines", {"trace", "defect"}},
      {"sphere_refraction", {"trace", "defect", "check-symplectic", "wavefront"}},
      {"plane_mirror", {"trace", "defect", "check-symplectic", "characteristic"}},
      {"paraboloid_mirror", {"trace", "wavefront", "mirror"}},
  };
  const fs::path root = fs::temp_directory_path() / ("oline_acceptance_" + std::to_string(std::random_device{}()));
  int files = 0, differing = 0, failed_runs = 0;
  for (const auto& [scene, commands] : runs)
    for (const auto& command : commands)
      for (const char* pass : {"a", "b"}) {
        const fs::path out = root / pass / scene / command;
        const std::string cmd = std::string("\"") + OLINE_CLI_PATH + "\" " + command + " --scene \"" + OLINE_SCENES_DIR + "/" +
                                scene + ".scene\" --out \"" + out.string() + "\" > \"" + (out.string() + ".log") + "\" 2>&1";
        fs::create_directories(out.parent_path());
        if (std::system(cmd.c_str()) != 0) {
          ++failed_runs;
          ADD_FAILURE() << cmd;
        }
      }
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file() || entry.path().extension() == ".log") continue;
    const fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
    ++files;
    if (slurp(entry.path()) != slurp(twin)) {
      ++differing;
      ADD_FAILURE() << "differs: " << twin;
    }
  }
  fs::remove_all(root);
  note("C9", "files_compared", files);
  note("C9", "differing", differing);
  note("C9", "failed_runs", failed_runs);
  EXPECT_GT(files, 0);
  EXPECT_EQ(differing, 0);
  EXPECT_EQ(failed_runs, 0);
}

int main(int argc, char** argv) {
  testing::InitGoogleTest(&argc, argv);
  testing::UnitTest::GetInstance()->listeners().Append(new Summary);
  return RUN_ALL_TESTS();
}
