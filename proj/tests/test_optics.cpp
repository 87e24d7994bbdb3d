#include "oline/optics.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace oline;

namespace {

std::mt19937_64 gen(4242);
double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an oline::Error";
  return ErrorCode::InvalidArgument;
}

const ImplicitSurface floor_plane = ImplicitSurface::plane({0, 0, 1}, 0.0);

Vec3 incidence(double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  return {std::sin(a), 0.0, -std::cos(a)};
}

}  // namespace

TEST(ReflectDirection, NormalIncidenceRetroreflects) {
  EXPECT_EQ(reflect_direction({0, 0, -1}, {0, 0, 1}), Vec3(0, 0, 1));
}

TEST(ReflectDirection, MirrorSymmetry) {
  const Vec3 out = reflect_direction(Vec3(1, 0, -1).normalized(), {0, 0, 1});
  EXPECT_NEAR((out - Vec3(1, 0, 1).normalized()).norm(), 0.0, 1e-15);
}

TEST(ReflectDirection, GrazingRejected) {
  EXPECT_EQ(code_of([] { reflect_direction({1, 0, 0}, {0, 0, 1}); }), ErrorCode::Grazing);
}

TEST(ReflectDirection, PreservesIncidenceAndPlane) {
  for (int i = 0; i < 500; ++i) {
    const Vec3 n = Vec3(uni(-1, 1), uni(-1, 1), uni(-1, 1)).normalized();
    Vec3 u = Vec3(uni(-1, 1), uni(-1, 1), uni(-1, 1)).normalized();
    if (std::abs(u.dot(n)) < 1e-3) continue;
    const Vec3 r = reflect_direction(u, n);
    EXPECT_NEAR(std::abs(r.dot(n)), std::abs(u.dot(n)), 1e-12);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    EXPECT_NEAR(r.dot(u.cross(n)), 0.0, 1e-12);
    EXPECT_NEAR((r - r.dot(n) * n - (u - u.dot(n) * n)).norm(), 0.0, 1e-12);
  }
}

TEST(RefractDirection, EqualIndicesIdentity) {
  const Vec3 u = Vec3(0.3, -0.2, -1).normalized();
  EXPECT_NEAR((refract_direction(u, Vec3(0.1, 0, 1).normalized(), 1.3, 1.3) - u).norm(), 0.0, 1e-15);
}

TEST(RefractDirection, NormalIncidenceUnchanged) {
  for (auto [n1, n2] : {std::pair{1.0, 1.5}, {1.5, 1.0}, {1.0, 2.4}})
    EXPECT_NEAR((refract_direction({0, 0, -1}, {0, 0, 1}, n1, n2) - Vec3(0, 0, -1)).norm(), 0.0, 1e-15);
}

TEST(RefractDirection, TotalInternalReflection) {
  // sin(a1) = 0.8 > n2/n1 = 2/3.
  const Vec3 u(0.8, 0.0, -0.6);
  EXPECT_EQ(code_of([&] { refract_direction(u, {0, 0, 1}, 1.5, 1.0); }), ErrorCode::TotalInternalReflection);
  EXPECT_NO_THROW(refract_direction(u, {0, 0, 1}, 1.0, 1.5));
}

TEST(RefractDirection, ThirtyDegreesIntoIndexTwo) {
  const Vec3 out = refract_direction(incidence(30), {0, 0, 1}, 1.0, 2.0);
  EXPECT_NEAR(out.x(), 0.25, 1e-15);
  EXPECT_NEAR(out.norm(), 1.0, 1e-15);
  EXPECT_LT(out.z(), 0.0);
}

TEST(RefractDirection, GrazingAndBadIndices) {
  EXPECT_EQ(code_of([] { refract_direction({1, 0, 0}, {0, 0, 1}, 1, 1.5); }), ErrorCode::Grazing);
  EXPECT_EQ(code_of([] { refract_direction({0, 0, -1}, {0, 0, 1}, 0, 1.5); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { refract_direction({0, 0, -1}, {0, 0, 1}, 1, -1); }), ErrorCode::InvalidArgument);
}

TEST(RefractDirection, NormalSideDoesNotMatter) {
  const Vec3 u = incidence(40);
  EXPECT_NEAR((refract_direction(u, {0, 0, 1}, 1, 1.5) - refract_direction(u, {0, 0, -1}, 1, 1.5)).norm(), 0, 1e-15);
}

TEST(RefractDirection, TangentialMomentumConserved) {
  for (int i = 0; i < 1000; ++i) {
    const Vec3 n = Vec3(uni(-1, 1), uni(-1, 1), uni(-1, 1)).normalized();
    const Vec3 u = Vec3(uni(-1, 1), uni(-1, 1), uni(-1, 1)).normalized();
    const double n1 = uni(1, 2.5), n2 = uni(1, 2.5);
    const Vec3 v1 = u - u.dot(n) * n;
    if (std::abs(u.dot(n)) < 1e-3) continue;
    if (n1 / n2 * v1.norm() >= 1.0) {
      EXPECT_EQ(code_of([&] { refract_direction(u, n, n1, n2); }), ErrorCode::TotalInternalReflection);
      continue;
    }
    const Vec3 out = refract_direction(u, n, n1, n2);
    const Vec3 v2 = out - out.dot(n) * n;
    EXPECT_LT((n2 * v2 - n1 * v1).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_NEAR(out.norm(), 1.0, 1e-12);
    EXPECT_GT(out.dot(n) * u.dot(n), 0.0);
  }
}

TEST(ReflectLine, AxialPlane) {
  const auto t = reflect_line(Ray::from({0, 0, 5}, {0, 0, -1}), floor_plane);
  EXPECT_EQ(t.line.direction(), Vec3(0, 0, 1));
  EXPECT_NEAR(t.line.foot().norm(), 0.0, 1e-15);
}

TEST(ReflectLine, OffsetAxialPlane) {
  const auto t = reflect_line(Ray::from({0, 1, 5}, {0, 0, -1}), floor_plane);
  EXPECT_EQ(t.line.direction(), Vec3(0, 0, 1));
  EXPECT_NEAR((t.line.foot() - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(ReflectLine, RandomSphereContainsHit) {
  const auto ball = ImplicitSurface::sphere(Vec3(0.2, -0.1, 0), 1.0);
  for (int i = 0; i < 300; ++i) {
    const Ray r = Ray::from(Vec3(uni(-0.3, 0.3), uni(-0.3, 0.3), 4), Vec3(uni(-0.05, 0.05), uni(-0.05, 0.05), -1));
    const auto t = reflect_line(r, ball);
    EXPECT_LT(t.line.distance_to(t.hit.point), 1e-10);
    EXPECT_NEAR((t.ray().origin() - t.hit.point).norm(), 0.0, 1e-12);
  }
}

TEST(ReflectLine, MissPropagates) {
  EXPECT_EQ(code_of([] { reflect_line(Ray::from({0, 0, 5}, {0, 0, 1}), floor_plane); }), ErrorCode::NoIntersection);
}

TEST(RefractLine, NormalIncidenceUnchanged) {
  const auto t = refract_line(Ray::from({0.3, 0, 5}, {0, 0, -1}), floor_plane, 1.0, 1.7);
  EXPECT_EQ(t.line.direction(), Vec3(0, 0, -1));
}

TEST(RefractLine, ThirtyDegreesIntoGlass) {
  const auto t = refract_line(Ray::from({0, 0, 1}, incidence(30)), floor_plane, 1.0, 1.5);
  const double angle = std::acos(t.line.direction().dot(Vec3(0, 0, -1)));
  EXPECT_NEAR(angle, 0.3398369094541219, 1e-14);
}

TEST(RefractLine, SixtyDegreesOutOfGlassReflectsTotally) {
  EXPECT_EQ(code_of([] { refract_line(Ray::from({0, 0, 1}, incidence(60)), floor_plane, 1.5, 1.0); }),
            ErrorCode::TotalInternalReflection);
}

TEST(OpticalSystem, MediaChainValidation) {
  OpticalSystem ok{{Interface::refractor(floor_plane, 1, 1.5), Interface::mirror(floor_plane, 1.5),
                    Interface::refractor(floor_plane, 1.5, 1.33)},
                   1.0};
  EXPECT_NO_THROW(ok.validate());
  EXPECT_DOUBLE_EQ(ok.index_of_segment(0), 1.0);
  EXPECT_DOUBLE_EQ(ok.index_of_segment(2), 1.5);
  EXPECT_DOUBLE_EQ(ok.index_of_segment(3), 1.33);

  OpticalSystem same{{Interface::refractor(floor_plane, 1.2, 1.2)}, 1.2};
  EXPECT_EQ(code_of([&] { same.validate(); }), ErrorCode::BadMediaChain);
  OpticalSystem broken{{Interface::refractor(floor_plane, 1, 1.5), Interface::refractor(floor_plane, 1.0, 1.3)}, 1.0};
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::BadMediaChain);
  OpticalSystem negative{{}, -1.0};
  EXPECT_EQ(code_of([&] { negative.validate(); }), ErrorCode::BadMediaChain);
}

TEST(PropagateSystem, EmptySystem) {
  const auto l = line_through({1, 2, 3}, {0, 1, 1});
  const auto tr = propagate_system(l, OpticalSystem{}, l.point_at(0.5));
  EXPECT_TRUE(tr.line_out() == l);
  EXPECT_EQ(tr.optical_length, 0.0);
  EXPECT_TRUE(tr.hits.empty());
}

TEST(PropagateSystem, SinglePlaneMirror) {
  const auto l = line_through({0, 0, 5}, {0, 0, -1});
  const auto tr = propagate_system(l, OpticalSystem{{Interface::mirror(floor_plane)}, 1.0}, Vec3(0, 0, 5));
  EXPECT_NEAR(tr.optical_length, 5.0, 1e-14);
  EXPECT_EQ(tr.line_out().direction(), Vec3(0, 0, 1));
}

TEST(PropagateSystem, TwoParallelMirrors) {
  const OpticalSystem sys{{Interface::mirror(floor_plane), Interface::mirror(ImplicitSurface::plane({0, 0, 1}, 1.0))}, 1.0};
  const auto tr = propagate_system(line_through({0, 0, 2}, {0, 0, -1}), sys, Vec3(0, 0, 2));
  // Down through z = 1 (not yet active), reflect at z = 0, up to z = 1.
  EXPECT_NEAR(tr.optical_length, 3.0, 1e-14);
  EXPECT_EQ(tr.line_out().direction(), Vec3(0, 0, -1));
  ASSERT_EQ(tr.hits.size(), 2u);
  EXPECT_NEAR(tr.hits[1].point.z(), 1.0, 1e-15);
}

TEST(PropagateSystem, IndicesWeightSegments) {
  const OpticalSystem sys{{Interface::refractor(floor_plane, 1.0, 2.0),
                           Interface::refractor(ImplicitSurface::plane({0, 0, 1}, -3.0), 2.0, 1.0)},
                          1.0};
  const auto tr = propagate_system(Ray::from({0, 0, 1}, {0, 0, -1}), sys);
  EXPECT_NEAR(tr.optical_length, 1.0 + 2.0 * 3.0, 1e-14);
}

TEST(PropagateSystem, ErrorsCarryInterfaceIndex) {
  const OpticalSystem sys{{Interface::mirror(floor_plane), Interface::mirror(ImplicitSurface::plane({0, 0, 1}, -1.0))}, 1.0};
  try {
    propagate_system(Ray::from({0, 0, 1}, {0, 0, -1}), sys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoIntersection);
    ASSERT_TRUE(e.interface_index().has_value());
    EXPECT_EQ(*e.interface_index(), 1);
  }
}

TEST(PropagateSystem, StartMustBeOnLine) {
  const auto l = line_through({0, 0, 5}, {0, 0, -1});
  EXPECT_EQ(code_of([&] { propagate_system(l, OpticalSystem{}, Vec3(1, 0, 0)); }), ErrorCode::InvalidArgument);
}

TEST(PropagateSystem, StartSelectsHitsAhead) {
  // Starting below the mirror the ray never meets it.
  const auto l = line_through({0, 0, 5}, {0, 0, -1});
  const OpticalSystem sys{{Interface::mirror(floor_plane)}, 1.0};
  EXPECT_EQ(code_of([&] { propagate_system(l, sys, Vec3(0, 0, -1)); }), ErrorCode::NoIntersection);
}
