#include <gtest/gtest.h>

#include <cmath>

#include "hyshadow/geometry.hpp"
#include "hyshadow/rng.hpp"

using namespace hyshadow;

namespace {

Point random_sphere_point(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(1.0 - z * z);
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Point random_torus_point(Rng& rng) { return {rng.uniform(), rng.uniform(), 0.0}; }

}  // namespace

TEST(Geometry, SphereAntipodalChord) {
  const auto m = Manifold::sphere();
  EXPECT_DOUBLE_EQ(m.dist({0, 0, 1}, {0, 0, -1}), 2.0);
}

TEST(Geometry, TorusWraparound) {
  const auto m = Manifold::torus();
  EXPECT_NEAR(m.dist({0.9, 0, 0}, {0.1, 0, 0}), 0.2, 1e-15);
  EXPECT_NEAR(m.dist({0, 0, 0}, {0.5, 0.5, 0}), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Geometry, OffManifoldPointIsRejected) {
  const auto s = Manifold::sphere();
  try {
    s.dist({0, 0, 1.1}, {0, 0, 1});
    FAIL() << "expected invalid-point";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidPoint);
  }
  EXPECT_THROW(Manifold::torus().dist({1.0, 0, 0}, {0, 0, 0}), Error);
}

TEST(Geometry, Projection) {
  const auto s = Manifold::sphere();
  const auto t = Manifold::torus();
  EXPECT_EQ(s.project({0, 0, 2}), (Point{0, 0, 1}));
  const Point p = t.project({1.25, -0.5, 0});
  EXPECT_DOUBLE_EQ(p.x, 0.25);
  EXPECT_DOUBLE_EQ(p.y, 0.5);
  try {
    s.project({0, 0, 0});
    FAIL() << "expected projection-undefined";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProjectionUndefined);
  }
}

TEST(Geometry, ProjectionIsIdempotent) {
  Rng rng(7);
  const auto s = Manifold::sphere();
  const auto t = Manifold::torus();
  for (int i = 0; i < 100; ++i) {
    const Vec3 raw{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point p = s.project(raw);
    EXPECT_TRUE(s.is_valid(p));
    const Point pp = s.project(p);
    EXPECT_NEAR(norm(pp - p), 0.0, 1e-15);
    const Point q = t.project({raw.x, raw.y, 0});
    EXPECT_TRUE(t.is_valid(q));
    EXPECT_EQ(t.project(q), q);
  }
}

TEST(Geometry, TriangleInequality) {
  Rng rng(11);
  for (const auto& m : {Manifold::sphere(), Manifold::torus()}) {
    for (int i = 0; i < 1000; ++i) {
      auto draw = [&] { return m.is_sphere() ? random_sphere_point(rng) : random_torus_point(rng); };
      const Point a = draw(), b = draw(), c = draw();
      EXPECT_LE(m.dist(a, c), m.dist(a, b) + m.dist(b, c) + 1e-12);
      EXPECT_DOUBLE_EQ(m.dist(a, b), m.dist(b, a));
      EXPECT_GE(m.dist(a, b), 0.0);
    }
  }
}

TEST(Geometry, IsometryInvariance) {
  Rng rng(13);
  const auto s = Manifold::sphere();
  const auto t = Manifold::torus();
  for (int i = 0; i < 200; ++i) {
    const Point a = random_sphere_point(rng), b = random_sphere_point(rng);
    const double th = rng.uniform(0, 2 * kPi);
    auto rot = [&](const Point& p) {
      return s.project({std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y, p.z});
    };
    EXPECT_NEAR(s.dist(rot(a), rot(b)), s.dist(a, b), 1e-12);

    const Point u = random_torus_point(rng), v = random_torus_point(rng);
    const double du = rng.uniform(), dv = rng.uniform();
    auto shift = [&](const Point& p) { return t.project({p.x + du, p.y + dv, 0}); };
    EXPECT_NEAR(t.dist(shift(u), shift(v)), t.dist(u, v), 1e-12);
  }
}

TEST(Geometry, OffsetHasRequestedChord) {
  const auto s = Manifold::sphere();
  const Point p{0, 0, 1};
  const auto [e1, e2] = s.tangent_basis(p);
  for (double rho : {1e-4, 0.3, 1.0, 1.9}) {
    const Point q = s.offset(p, e1, e2, rho, 0.7);
    EXPECT_NEAR(s.dist(p, q), rho, 1e-12);
  }
  const Point mid = s.interpolate({1, 0, 0}, {0, 1, 0}, 0.5);
  EXPECT_NEAR(mid.x, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(mid.y, std::sqrt(0.5), 1e-15);
  const auto t = Manifold::torus();
  const Point w = t.interpolate({0.9, 0.5, 0}, {0.1, 0.5, 0}, 0.5);
  EXPECT_NEAR(w.x, 0.0, 1e-15);
}
