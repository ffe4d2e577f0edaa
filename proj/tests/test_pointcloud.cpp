#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "latmap/errors.hpp"
#include "latmap/pointcloud.hpp"

using namespace latmap;
using testutil::TempFile;

TEST_CASE("load_point_cloud parses plain xyz rows") {
  TempFile f("lm_cloud_plain.xyz");
  f.write("0 0 0\n1 0 0\n0 1 0\n");
  PointCloud c = load_point_cloud(f.path());
  REQUIRE(c.points.size() == 3);
  CHECK(!c.has_labels());
  CHECK(c.points[1].x == 1.0);
  CHECK(c.points[2].y == 1.0);
}

TEST_CASE("load_point_cloud skips comments and blank lines") {
  TempFile f("lm_cloud_comments.xyz");
  f.write("# header\n\n  \t\n0.5 -2 3e-1\n# trailing comment\n");
  PointCloud c = load_point_cloud(f.path());
  REQUIRE(c.points.size() == 1);
  CHECK(c.points[0].x == doctest::Approx(0.5));
  CHECK(c.points[0].y == doctest::Approx(-2.0));
  CHECK(c.points[0].z == doctest::Approx(0.3));
}

TEST_CASE("load_point_cloud reads labeled rows") {
  TempFile f("lm_cloud_labeled.xyz");
  f.write("0 0 0 1\n1 0 0 2\n1 1 0 3\n0 1 0 4\n0.5 0.5 0 0\n");
  PointCloud c = load_point_cloud(f.path());
  REQUIRE(c.has_labels());
  REQUIRE(c.labels.size() == 5);
  CHECK(c.labels[0] == 1);
  CHECK(c.labels[3] == 4);
  CHECK(c.labels[4] == 0);
}

TEST_CASE("load_point_cloud error paths") {
  SUBCASE("missing file") {
    try {
      load_point_cloud("/nonexistent/path/cloud.xyz");
      FAIL("expected io error");
    } catch (const error& e) {
      CHECK(e.code() == errc::io);
    }
  }
  SUBCASE("short row") {
    TempFile f("lm_cloud_short.xyz");
    f.write("0 0\n");
    try {
      load_point_cloud(f.path());
      FAIL("expected parse error");
    } catch (const error& e) {
      CHECK(e.code() == errc::parse);
    }
  }
  SUBCASE("non-numeric field") {
    TempFile f("lm_cloud_nan.xyz");
    f.write("0 zero 0\n");
    CHECK_THROWS_AS(load_point_cloud(f.path()), error);
  }
  SUBCASE("empty file") {
    TempFile f("lm_cloud_empty.xyz");
    f.write("# only comments\n");
    try {
      load_point_cloud(f.path());
      FAIL("expected parse error");
    } catch (const error& e) {
      CHECK(e.code() == errc::parse);
    }
  }
  SUBCASE("label out of range") {
    TempFile f("lm_cloud_label7.xyz");
    f.write("0 0 0 7\n");
    CHECK_THROWS_AS(load_point_cloud(f.path()), error);
  }
  SUBCASE("mixed labeled and unlabeled rows") {
    TempFile f("lm_cloud_mixed.xyz");
    f.write("0 0 0 1\n1 0 0\n");
    CHECK_THROWS_AS(load_point_cloud(f.path()), error);
  }
  SUBCASE("nonzero labels must cover 1..4") {
    TempFile f("lm_cloud_partial.xyz");
    f.write("0 0 0 1\n1 0 0 2\n2 0 0 0\n");
    try {
      load_point_cloud(f.path());
      FAIL("expected validation error");
    } catch (const error& e) {
      CHECK(e.code() == errc::validation);
    }
  }
  SUBCASE("five columns") {
    TempFile f("lm_cloud_wide.xyz");
    f.write("0 0 0 1 9\n");
    CHECK_THROWS_AS(load_point_cloud(f.path()), error);
  }
}

TEST_CASE("normalize_cloud centers and scales") {
  PointCloud c;
  c.points = {{0, 0, 0}, {4, 0, 0}};
  CloudTransform tf = normalize_cloud(c);
  CHECK(c.points[0].x == doctest::Approx(-1.0));
  CHECK(c.points[1].x == doctest::Approx(1.0));
  CHECK(tf.T.x == doctest::Approx(-2.0));
  CHECK(tf.S == doctest::Approx(0.5));
}

TEST_CASE("normalize_cloud fixes an already-normalized cloud") {
  PointCloud c;
  c.points = {{1, 0, 0}, {-1, 0, 0}};
  CloudTransform tf = normalize_cloud(c);
  CHECK(c.points[0].x == doctest::Approx(1.0));
  CHECK(tf.S == doctest::Approx(1.0));
  CHECK(norm(tf.T) == doctest::Approx(0.0));
}

TEST_CASE("normalize_cloud round-trip and idempotence") {
  auto rng = testutil::test_rng(11);
  PointCloud c;
  for (int i = 0; i < 40; ++i)
    c.points.push_back({testutil::uniform(rng, -3, 9), testutil::uniform(rng, 5, 6),
                        testutil::uniform(rng, -0.2, 0.2)});
  PointCloud original = c;
  CloudTransform tf = normalize_cloud(c);

  for (size_t i = 0; i < c.points.size(); ++i) {
    Vec3 back = tf.to_input(c.points[i]);
    CHECK(norm(back - original.points[i]) <= 1e-12 * (1.0 + norm(original.points[i])));
  }

  // Second normalization is the identity transform.
  PointCloud again = c;
  CloudTransform tf2 = normalize_cloud(again);
  CHECK(std::fabs(tf2.S - 1.0) <= 1e-12);
  CHECK(norm(tf2.T) <= 1e-12);
}

TEST_CASE("normalize_cloud rejects a degenerate cloud") {
  PointCloud c;
  c.points = {{5, 5, 5}, {5, 5, 5}};
  try {
    normalize_cloud(c);
    FAIL("expected degenerate error");
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate);
  }
}
