#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "latmap/errors.hpp"
#include "latmap/surface_gen.hpp"

using namespace latmap;

TEST_CASE("gen_sphere samples the unit sphere") {
  PointCloud cloud = gen_sphere(500, 11);
  REQUIRE(cloud.points.size() == 500);
  CHECK(cloud.labels.empty());
  for (const auto& p : cloud.points)
    CHECK(std::fabs(norm(p) - 1.0) <= 1e-12);

  SUBCASE("deterministic per seed") {
    PointCloud again = gen_sphere(500, 11);
    REQUIRE(again.points.size() == cloud.points.size());
    for (size_t i = 0; i < cloud.points.size(); ++i)
      CHECK(norm(again.points[i] - cloud.points[i]) == 0.0);
    PointCloud other = gen_sphere(500, 12);
    CHECK(norm(other.points[0] - cloud.points[0]) > 0.0);
  }
  SUBCASE("count validation") {
    CHECK_THROWS_AS(gen_sphere(0, 1), error);
    CHECK_THROWS_AS(gen_sphere(-3, 1), error);
  }
}

TEST_CASE("gen_ellipsoid stays on the implicit surface") {
  const double rx = 2.0, ry = 1.0, rz = 0.5;
  PointCloud cloud = gen_ellipsoid(rx, ry, rz, 400, 3);
  REQUIRE(cloud.points.size() == 400);
  for (const auto& p : cloud.points) {
    double q = (p.x / rx) * (p.x / rx) + (p.y / ry) * (p.y / ry) + (p.z / rz) * (p.z / rz);
    CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gen_ellipsoid(1.0, 0.0, 1.0, 10, 1), error);
}

TEST_CASE("gen_torus stays on the implicit surface") {
  const double R = 2.0, r = 1.0;
  PointCloud cloud = gen_torus(R, r, 500, 5);
  REQUIRE(cloud.points.size() == 500);
  for (const auto& p : cloud.points) {
    double rho = std::hypot(p.x, p.y);
    double d = (rho - R) * (rho - R) + p.z * p.z;
    CHECK(d == doctest::Approx(r * r).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gen_torus(1.0, 1.0, 10, 1), error);
  CHECK_THROWS_AS(gen_torus(2.0, -0.5, 10, 1), error);
}

TEST_CASE("gen_slab layout and labels") {
  const double lx = 2.0, ly = 1.0;
  PointCloud cloud = gen_slab(lx, ly, 400, 9, 0.25);
  REQUIRE(cloud.points.size() == 400);
  REQUIRE(cloud.labels.size() == 400);

  // The four corners come first, ordered counterclockwise from the origin.
  CHECK(norm(cloud.points[0] - Vec3{0, 0, 0}) == 0.0);
  CHECK(norm(cloud.points[1] - Vec3{lx, 0, 0}) == 0.0);
  CHECK(norm(cloud.points[2] - Vec3{lx, ly, 0}) == 0.0);
  CHECK(norm(cloud.points[3] - Vec3{0, ly, 0}) == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(cloud.labels[i] == i + 1);

  int boundary = 0;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    CHECK(p.z == 0.0);
    CHECK(p.x >= 0.0);
    CHECK(p.x <= lx);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= ly);
    switch (cloud.labels[i]) {
      case 1: CHECK(p.y == 0.0); ++boundary; break;
      case 2: CHECK(p.x == lx); ++boundary; break;
      case 3: CHECK(p.y == ly); ++boundary; break;
      case 4: CHECK(p.x == 0.0); ++boundary; break;
      default: CHECK(cloud.labels[i] == 0); break;
    }
  }
  CHECK(boundary == 100);  // requested fraction of the samples

  SUBCASE("boundary count never drops below the corner minimum") {
    PointCloud tiny = gen_slab(1.0, 1.0, 10, 3, 0.0);
    int nb = 0;
    for (int l : tiny.labels) nb += (l != 0);
    CHECK(nb == 8);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(gen_slab(0.0, 1.0, 10, 1), error);
    CHECK_THROWS_AS(gen_slab(1.0, 1.0, 10, 1, 1.5), error);
    CHECK_THROWS_AS(gen_slab(1.0, 1.0, 0, 1), error);
  }
}

TEST_CASE("gen_genus2 lands on the zero level set") {
  Genus2Shape shape;
  PointCloud cloud = gen_genus2(shape, 300, 7);
  REQUIRE(cloud.points.size() == 300);
  const double bx = shape.c + shape.R + shape.r + 0.1;
  for (const auto& p : cloud.points) {
    CHECK(std::fabs(genus2_implicit(shape, p)) <= 1e-12);
    CHECK(std::fabs(p.x) <= bx);
  }
  // Both handles are populated.
  int left = 0, right = 0;
  for (const auto& p : cloud.points) {
    if (p.x < -shape.c + shape.R) left += (p.x < 0);
    if (p.x > shape.c - shape.R) right += (p.x > 0);
  }
  CHECK(left > 20);
  CHECK(right > 20);

  SUBCASE("deterministic per seed") {
    PointCloud again = gen_genus2(shape, 300, 7);
    for (size_t i = 0; i < cloud.points.size(); ++i)
      CHECK(norm(again.points[i] - cloud.points[i]) == 0.0);
  }
}

TEST_CASE("genus2_implicit sign structure") {
  Genus2Shape s;
  // Solid interior: on the core circle of each handle torus.
  CHECK(genus2_implicit(s, {-s.c + s.R, 0, 0}) < 0.0);
  CHECK(genus2_implicit(s, {s.c - s.R, 0, 0}) < 0.0);
  CHECK(genus2_implicit(s, {0, 0, 0}) < 0.0);  // inside the rod
  // Far outside and inside the handle holes.
  CHECK(genus2_implicit(s, {0, 0, 10}) > 0.0);
  CHECK(genus2_implicit(s, {-s.c, 0, s.r + 0.3}) > 0.0);
}
