#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "latmap/errors.hpp"
#include "latmap/hyp_map.hpp"
#include "latmap/pointcloud.hpp"
#include "latmap/surface_gen.hpp"

using namespace latmap;

namespace {

Vec3 apex() { return {0, 0, 1}; }

Vec3 x_point(double t) { return {std::sinh(t), 0, std::cosh(t)}; }

// Hyperbolic translation of length t along the x axis.
Mat3 x_translation(double t) {
  Mat3 a;
  a(0, 0) = std::cosh(t);
  a(0, 2) = std::sinh(t);
  a(2, 0) = std::sinh(t);
  a(2, 2) = std::cosh(t);
  return a;
}

// Shared genus-2 fixture: normalized dumbbell cloud, matching cut system,
// n=24 lattice and octagon edge transformations.  Built once; several test
// cases below reuse it because construction dominates their runtime.
struct Genus2Fixture {
  PointCloud cloud;
  CloudTransform tf;
  std::vector<HypMembrane> cuts;
  Lattice lat;
  FuchsianGroupSpec group;
  EdgeTransforms et;

  Genus2Fixture() {
    cloud = gen_genus2(Genus2Shape{}, 12000, 7);
    tf = normalize_cloud(cloud);
    cuts = transform_cuts(genus2_dumbbell_cuts(), tf);
    lat = build_lattice(cloud, {0.0, 24});
    group = octagon_group();
    et = edge_transformations(lat, cuts, group);
  }
};

const Genus2Fixture& genus2() {
  static Genus2Fixture fixture;
  return fixture;
}

double residual_at(const Lattice& lat, const EdgeTransforms& et, const HypField& f,
                   const HypField& next, int32_t v) {
  // Stationarity defect of next(v) against the transformed old neighbors.
  Vec3 sum;
  for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
    int32_t w = lat.adj_vtx[t];
    int32_t e = lat.adj_edge[t];
    Vec3 y = et.directed(e, lat.edges[e][0] == v) * f[w];
    double d = hyp_distance(next[v], y);
    if (d < 1e-15) continue;
    sum += std::sinh(d) * hyp_direction(next[v], y);
  }
  return norm(sum);
}

}  // namespace

TEST_CASE("Mat3 and Lorentz helpers") {
  Mat3 a = x_translation(0.8);
  SUBCASE("isometry defect and inverse") {
    CHECK(isometry_defect(a) <= 1e-12);
    Mat3 inv = lorentz_inverse(a);
    CHECK(frobenius_distance(a * inv, Mat3::identity()) <= 1e-12);
    CHECK(frobenius_distance(inv * a, Mat3::identity()) <= 1e-12);
  }
  SUBCASE("lorentz_dot signature") {
    CHECK(lorentz_dot(apex(), apex()) == doctest::Approx(1.0));
    Vec3 p = x_point(0.7);
    CHECK(lorentz_dot(p, p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lorentz_dot({1, 0, 0}, {1, 0, 0}) == doctest::Approx(-1.0));
  }
  SUBCASE("matrix application preserves the sheet") {
    Vec3 q = a * x_point(-0.3);
    CHECK(lorentz_dot(q, q) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.z >= 1.0);
  }
}

TEST_CASE("hyperboloid_project") {
  Vec3 p = hyperboloid_project({0, 0, 2});
  CHECK(norm(p - apex()) <= 1e-15);

  Vec3 q = x_point(1.1);
  CHECK(norm(hyperboloid_project(q) - q) <= 1e-12);

  try {
    hyperboloid_project({1, 0, 0});
    FAIL("expected degenerate error");
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate);
  }
  CHECK_THROWS_AS(hyperboloid_project({0, 0, -2}), error);
}

TEST_CASE("hyp_distance") {
  CHECK(hyp_distance(apex(), apex()) == 0.0);
  for (double t : {0.1, 1.0, 3.7}) {
    CHECK(hyp_distance(apex(), x_point(t)) == doctest::Approx(t).epsilon(1e-13));
  }
  auto rng = testutil::test_rng(3);
  for (int i = 0; i < 20; ++i) {
    Vec3 p = hyperboloid_project(
        {testutil::uniform(rng, -1, 1), testutil::uniform(rng, -1, 1), 2.0});
    Vec3 q = hyperboloid_project(
        {testutil::uniform(rng, -1, 1), testutil::uniform(rng, -1, 1), 2.0});
    CHECK(hyp_distance(p, q) == doctest::Approx(hyp_distance(q, p)).epsilon(1e-14));
    CHECK(hyp_distance(p, q) >= 0.0);
  }
}

TEST_CASE("hyp_direction is the unit initial velocity") {
  Vec3 p = x_point(0.4);
  Vec3 q = hyperboloid_project({0.3, -0.9, 2.0});
  Vec3 e = hyp_direction(p, q);
  // Spacelike unit vector tangent at p.
  CHECK(lorentz_dot(e, e) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(lorentz_dot(e, p) == doctest::Approx(0.0).epsilon(1e-10));
  // Exponentiating reproduces q.
  double d = hyp_distance(p, q);
  Vec3 reached = std::cosh(d) * p + std::sinh(d) * e;
  CHECK(norm(reached - q) <= 1e-10);

  CHECK_THROWS_AS(hyp_direction(p, p), error);
}

TEST_CASE("cosh_center") {
  SUBCASE("single point") {
    Vec3 p = x_point(0.9);
    CHECK(norm(cosh_center({p}) - p) <= 1e-14);
  }
  SUBCASE("two points give the geodesic midpoint") {
    const double t = 1.3;
    Vec3 c = cosh_center({apex(), x_point(t)});
    CHECK(norm(c - x_point(t / 2)) <= 1e-12);
  }
  SUBCASE("symmetric triangle centers on the apex") {
    const double r = 0.8;
    std::vector<Vec3> pts;
    for (int k = 0; k < 3; ++k) {
      double th = 2.0 * M_PI * k / 3.0;
      pts.push_back({std::sinh(r) * std::cos(th), std::sinh(r) * std::sin(th), std::cosh(r)});
    }
    CHECK(norm(cosh_center(pts) - apex()) <= 1e-13);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(cosh_center({}), error);
  }
}

TEST_CASE("isometry_from_correspondence") {
  Vec3 p1 = apex(), q1 = x_point(0.9);
  Mat3 rot;  // rotate the target segment out of the x axis and push it out
  {
    double c = std::cos(0.6), s = std::sin(0.6);
    rot(0, 0) = c;
    rot(0, 1) = -s;
    rot(1, 0) = s;
    rot(1, 1) = c;
    rot(2, 2) = 1.0;
  }
  Mat3 move = rot * x_translation(-0.4);
  Vec3 p2 = move * p1, q2 = move * q1;

  Mat3 a = isometry_from_correspondence(p1, q1, p2, q2);
  CHECK(isometry_defect(a) <= 1e-10);
  CHECK(norm(a * p1 - p2) <= 1e-12);
  CHECK(norm(a * q1 - q2) <= 1e-12);

  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(isometry_from_correspondence(p1, q1, p2, move * x_point(1.5)), error);
  }
  SUBCASE("degenerate segment is rejected") {
    CHECK_THROWS_AS(isometry_from_correspondence(p1, p1, p2, p2), error);
  }
}

TEST_CASE("octagon_group satisfies the genus-2 relation") {
  FuchsianGroupSpec g = octagon_group();
  REQUIRE(g.genus == 2);
  REQUIRE(g.gens.size() == 4);
  CHECK(g.relation_residual() <= 1e-9);
  for (const auto& m : g.gens) CHECK(isometry_defect(m) <= 1e-10);

  SUBCASE("generators are hyperbolic translations of the regular octagon") {
    // Lorentz trace of a hyperbolic translation is 1 + 2cosh(l); for the
    // regular octagon side pairing, trace = 5 + 4*sqrt(2).
    for (const auto& m : g.gens) {
      double tr = m(0, 0) + m(1, 1) + m(2, 2);
      CHECK(tr == doctest::Approx(5.0 + 4.0 * std::sqrt(2.0)).epsilon(1e-10));
    }
  }

  SUBCASE("handle commutators are hyperbolic, not parabolic") {
    // A cone-point (orbifold) pairing would make these parabolic with trace
    // exactly 3; the surface group must give |trace| > 3.
    for (int k = 0; k < 2; ++k) {
      Mat3 a = g.gens[2 * k], b = g.gens[2 * k + 1];
      Mat3 c = a * b * lorentz_inverse(a) * lorentz_inverse(b);
      double tr = c(0, 0) + c(1, 1) + c(2, 2);
      CHECK(tr == doctest::Approx(134.882250994).epsilon(1e-6));
      CHECK(tr > 3.1);
    }
  }
}

TEST_CASE("word_matrix") {
  FuchsianGroupSpec g = octagon_group();
  SUBCASE("letters compose left to right") {
    Mat3 w = word_matrix(g, {1, -2});
    Mat3 expect = g.gens[0] * lorentz_inverse(g.gens[1]);
    CHECK(frobenius_distance(w, expect) <= 1e-12);
  }
  SUBCASE("empty word is the identity") {
    CHECK(frobenius_distance(word_matrix(g, {}), Mat3::identity()) <= 1e-15);
  }
  SUBCASE("out-of-range generator index") {
    CHECK_THROWS_AS(word_matrix(g, {5}), error);
    CHECK_THROWS_AS(word_matrix(g, {0}), error);
  }
}

TEST_CASE("edge_transformations on a plane membrane") {
  Lattice lat = testutil::box_lattice(3, 2, 1);
  FuchsianGroupSpec g = octagon_group();
  HypMembrane m;
  m.geom.normal = {1, 0, 0};
  m.geom.offset = 1.5 * lat.h;
  m.word = {1};
  EdgeTransforms et = edge_transformations(lat, {m}, g);

  int crossing = 0;
  for (int32_t e = 0; e < lat.num_edges(); ++e) {
    if (et.nontrivial[e]) {
      ++crossing;
      // Canonical direction goes from node x=1 to x=2 (a<b keeps lex order),
      // i.e. from the negative to the positive side: alpha = a1.
      CHECK(frobenius_distance(et.alpha[e], g.gens[0]) <= 1e-12);
      CHECK(frobenius_distance(et.directed(e, false), lorentz_inverse(g.gens[0])) <= 1e-12);
    } else {
      CHECK(frobenius_distance(et.alpha[e], Mat3::identity()) <= 1e-15);
    }
    // Antisymmetry for every edge.
    Mat3 prod = et.directed(e, true) * et.directed(e, false);
    CHECK(frobenius_distance(prod, Mat3::identity()) <= 1e-9);
  }
  CHECK(crossing == 6);  // 2x1 sheet of x-edges between x=1 and x=2

  SUBCASE("contractible square monodromy is the identity") {
    bool checked = false;
    for_each_unit_square(lat, [&](int32_t a, int32_t b, int32_t c, int32_t d) {
      Mat3 mon = loop_monodromy(lat, et, {a, b, c, d, a});
      CHECK(frobenius_distance(mon, Mat3::identity()) <= 1e-9);
      checked = true;
    });
    CHECK(checked);
  }

  SUBCASE("monodromy rejects non-adjacent hops") {
    int32_t v0 = lat.find(0, 0, 0), v2 = lat.find(2, 0, 0);
    CHECK_THROWS_AS(loop_monodromy(lat, et, {v0, v2, v0}), error);
  }
}

TEST_CASE("edge_transformations rejects membranes slicing a square") {
  Lattice lat = testutil::box_lattice(3, 3, 1);
  HypMembrane bad;
  bad.geom.normal = {1, 0, 0};
  bad.geom.offset = 1.5 * lat.h;
  bad.geom.sides.push_back({{0, 1, 0}, 1.5 * lat.h, false});
  bad.word = {1};
  try {
    edge_transformations(lat, {bad}, octagon_group());
    FAIL("expected validation error");
  } catch (const error& e) {
    CHECK(e.code() == errc::validation);
  }
}

TEST_CASE("cosh_cm_step") {
  SUBCASE("two vertices with trivial transforms swap") {
    Lattice lat = testutil::path_lattice(2);
    EdgeTransforms et = edge_transformations(lat, {}, octagon_group());
    HypField f = {x_point(0.5), x_point(-0.2)};
    HypField out = cosh_cm_step(lat, et, f);
    CHECK(norm(out[0] - f[1]) <= 1e-14);
    CHECK(norm(out[1] - f[0]) <= 1e-14);
  }

  SUBCASE("star center moves to the cosh-center of the ring") {
    Lattice lat = testutil::star_lattice();
    EdgeTransforms et = edge_transformations(lat, {}, octagon_group());
    HypField f(lat.num_vertices(), apex());
    int32_t o = lat.find(0, 0, 0);
    // Put the six neighbors somewhere asymmetric.
    auto rng = testutil::test_rng(77);
    std::vector<Vec3> ring;
    for (int32_t v = 0; v < lat.num_vertices(); ++v) {
      if (v == o) continue;
      f[v] = hyperboloid_project(
          {testutil::uniform(rng, -1, 1), testutil::uniform(rng, -1, 1), 1.8});
      ring.push_back(f[v]);
    }
    HypField out = cosh_cm_step(lat, et, f);
    CHECK(norm(out[o] - cosh_center(ring)) <= 1e-13);
  }

  SUBCASE("stationarity residual of the closed form is tiny") {
    const auto& fx = genus2();
    auto rng = testutil::test_rng(101);
    HypField f(fx.lat.num_vertices());
    for (auto& p : f)
      p = hyperboloid_project(
          {testutil::uniform(rng, -0.5, 0.5), testutil::uniform(rng, -0.5, 0.5), 1.5});
    HypField next = cosh_cm_step(fx.lat, fx.et, f);
    double worst = 0.0;
    for (int32_t v = 0; v < fx.lat.num_vertices(); v += 97)
      worst = std::max(worst, residual_at(fx.lat, fx.et, f, next, v));
    CHECK(worst <= 1e-9);
  }

  SUBCASE("fixed point stays put") {
    Lattice lat = testutil::path_lattice(2);
    EdgeTransforms et = edge_transformations(lat, {}, octagon_group());
    Vec3 p = x_point(0.3);
    HypField f = {p, p};
    HypField out = cosh_cm_step(lat, et, f);
    CHECK(norm(out[0] - p) <= 1e-12);
    CHECK(norm(out[1] - p) <= 1e-12);
  }
}

TEST_CASE("cosh_energy") {
  Lattice lat = testutil::path_lattice(2);
  EdgeTransforms et = edge_transformations(lat, {}, octagon_group());

  SUBCASE("constant field has zero energy") {
    HypField f = {x_point(0.4), x_point(0.4)};
    HypEnergy e = cosh_energy(lat, et, f);
    CHECK(e.cosh_energy <= 1e-15);
    CHECK(e.dirichlet <= 1e-15);
  }

  SUBCASE("single edge matches the closed forms") {
    const double t = 1.7;
    HypField f = {apex(), x_point(t)};
    HypEnergy e = cosh_energy(lat, et, f);
    CHECK(e.cosh_energy == doctest::Approx(std::cosh(t) - 1.0).epsilon(1e-12));
    CHECK(e.dirichlet == doctest::Approx(0.5 * t * t).epsilon(1e-12));
  }

  SUBCASE("cosh energy approaches the Dirichlet energy for short edges") {
    const double t = 1e-3;
    HypField f = {apex(), x_point(t)};
    HypEnergy e = cosh_energy(lat, et, f);
    CHECK(std::fabs(e.cosh_energy / e.dirichlet - 1.0) <= 1e-6);
  }

  SUBCASE("invariant under a global isometry with conjugated transforms") {
    Lattice box = testutil::box_lattice(2, 2, 1);
    FuchsianGroupSpec g = octagon_group();
    HypMembrane m;
    m.geom.normal = {1, 0, 0};
    m.geom.offset = 1.5 * box.h;
    m.word = {1};
    EdgeTransforms et1 = edge_transformations(box, {m}, g);

    const double shift = 0.45;
    FuchsianGroupSpec g2 = conjugation_family(g).make({shift});
    EdgeTransforms et2 = edge_transformations(box, {m}, g2);
    Mat3 a = x_translation(shift);

    auto rng = testutil::test_rng(31);
    HypField f(box.num_vertices()), af(box.num_vertices());
    for (int32_t v = 0; v < box.num_vertices(); ++v) {
      f[v] = hyperboloid_project(
          {testutil::uniform(rng, -1, 1), testutil::uniform(rng, -1, 1), 1.7});
      af[v] = a * f[v];
    }
    HypEnergy e1 = cosh_energy(box, et1, f);
    HypEnergy e2 = cosh_energy(box, et2, af);
    CHECK(e2.cosh_energy == doctest::Approx(e1.cosh_energy).epsilon(1e-9));
    CHECK(e2.dirichlet == doctest::Approx(e1.dirichlet).epsilon(1e-9));
  }
}

TEST_CASE("harmonic_hyperbolic with trivial transforms stays at the apex") {
  Lattice lat = testutil::box_lattice(2, 1, 1);
  EdgeTransforms et = edge_transformations(lat, {}, octagon_group());
  HypFlowStats stats;
  HypField f = harmonic_hyperbolic(lat, et, {}, &stats);
  CHECK(stats.converged);
  CHECK(stats.sweeps <= 1);
  for (const auto& p : f) CHECK(norm(p - apex()) <= 1e-14);
}

TEST_CASE("harmonic_hyperbolic on the genus-2 surface") {
  const auto& fx = genus2();
  HypFlowOptions opts;  // tol 1e-7, max 5000
  HypFlowStats stats;
  HypField f = harmonic_hyperbolic(fx.lat, fx.et, opts, &stats);

  CHECK(stats.converged);
  CHECK(stats.sweeps < opts.max_sweeps);
  CHECK(stats.movement <= opts.tol);
  CHECK(stats.energy_monotone);
  REQUIRE(stats.energy_trace.size() == static_cast<size_t>(stats.sweeps) + 1);

  // Every vertex stays on the sheet.
  for (const auto& p : f) {
    CHECK(std::fabs(lorentz_dot(p, p) - 1.0) <= 1e-10);
    CHECK(p.z >= 1.0);
  }

  // Balanced condition at convergence.
  CHECK(hyp_balanced_residual(fx.lat, fx.et, f) <= 10.0 * opts.tol);

  SUBCASE("deterministic rerun") {
    HypFlowStats stats2;
    HypField f2 = harmonic_hyperbolic(fx.lat, fx.et, opts, &stats2);
    CHECK(stats2.sweeps == stats.sweeps);
    double worst = 0.0;
    for (size_t i = 0; i < f.size(); ++i) worst = std::max(worst, norm(f[i] - f2[i]));
    CHECK(worst == 0.0);
  }

  SUBCASE("equivariance under a global conjugation") {
    const double shift = 0.3;
    FuchsianGroupSpec g2 = conjugation_family(fx.group).make({shift});
    EdgeTransforms et2 = edge_transformations(fx.lat, fx.cuts, g2);
    Mat3 a = x_translation(shift);

    HypField warm(fx.lat.num_vertices(), a * apex());
    HypFlowStats stats2;
    HypField g = harmonic_hyperbolic(fx.lat, et2, opts, &stats2, &warm);

    CHECK(stats2.sweeps == stats.sweeps);
    double worst = 0.0;
    for (size_t i = 0; i < f.size(); ++i)
      worst = std::max(worst, hyp_distance(a * f[i], g[i]));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("fn_twist_family preserves the surface relation") {
  HypFamily fam = fn_twist_family(octagon_group());
  REQUIRE(fam.dim == 1);
  for (double t : {-1.1, -0.25, 0.0, 0.6, 1.7}) {
    FuchsianGroupSpec g = fam.make({t});
    CHECK(g.relation_residual() <= g.relation_tol);
    for (const auto& m : g.gens) CHECK(isometry_defect(m) <= 1e-9);
  }
}

TEST_CASE("conjugation_family leaves the harmonic energy constant") {
  const auto& fx = genus2();
  HypFamily fam = conjugation_family(fx.group);
  REQUIRE(fam.dim == 1);

  HypFlowOptions opts;
  opts.tol = 1e-7;
  double e0 = 0.0;
  int k = 0;
  for (double t : {0.0, -0.4, 0.4}) {
    FuchsianGroupSpec g = fam.make({t});
    EdgeTransforms et = edge_transformations(fx.lat, fx.cuts, g);
    HypFlowStats stats;
    HypField f = harmonic_hyperbolic(fx.lat, et, opts, &stats);
    REQUIRE(stats.converged);
    double e = cosh_energy(fx.lat, et, f).dirichlet;
    if (k++ == 0)
      e0 = e;
    else
      CHECK(std::fabs(e - e0) <= 1e-6 * e0);
  }
}

TEST_CASE("harmonic_hyperbolic_pipeline report") {
  const auto& fx = genus2();
  HypFlowOptions opts;
  HypResult res =
      harmonic_hyperbolic_pipeline(fx.cloud, {0.0, 24}, fx.cuts, fx.group, opts);

  REQUIRE(res.point_map.size() == fx.cloud.points.size());
  for (const auto& p : res.point_map) {
    CHECK(std::fabs(lorentz_dot(p, p) - 1.0) <= 1e-9);
    auto dc = disk_coords(p);
    CHECK(dc[0] * dc[0] + dc[1] * dc[1] < 1.0);
  }
  CHECK(res.stats.converged);
  CHECK(res.stats.energy_monotone);
  CHECK(res.energy.dirichlet > 0.0);
  CHECK(res.normalized_energy ==
        doctest::Approx(res.energy.dirichlet / (4.0 * M_PI * (fx.group.genus - 1)))
            .epsilon(1e-12));
  CHECK(res.relation_residual <= fx.group.relation_tol);
  CHECK(res.balanced <= 1e-5);
  CHECK(res.search_evaluations == 0);
}

TEST_CASE("conformal_hyperbolic twist search matches dense sampling") {
  const auto& fx = genus2();

  // Brute-force the 1-parameter twist family at 50 points with warm starts.
  HypFamily fam = fn_twist_family(fx.group);
  HypFlowOptions flow;
  flow.tol = 1e-5;
  const int samples = 50;
  const double lo = -2.0, hi = 2.0;
  double best_t = 0.0, best_e = 1e300;
  HypField warm;
  for (int s = 0; s < samples; ++s) {
    double t = lo + (hi - lo) * s / (samples - 1);
    FuchsianGroupSpec g = fam.make({t});
    EdgeTransforms et = edge_transformations(fx.lat, fx.cuts, g);
    HypFlowStats stats;
    HypField f = harmonic_hyperbolic(fx.lat, et, flow, &stats,
                                     warm.empty() ? nullptr : &warm);
    warm = f;
    double e = cosh_energy(fx.lat, et, f).dirichlet;
    if (e < best_e) {
      best_e = e;
      best_t = t;
    }
  }
  // The minimum is interior to the sampling window.
  CHECK(best_t > lo + 1e-9);
  CHECK(best_t < hi - 1e-9);

  HypSearchOptions search;
  search.flow = flow;
  search.param_tol = 1e-3;
  HypResult res = conformal_hyperbolic(fx.cloud, {0.0, 24}, fx.cuts, fam, search);
  REQUIRE(res.best_params.size() == 1);
  CHECK(res.search_evaluations > 1);

  // Agreement within the sampling grid resolution.
  const double grid = (hi - lo) / (samples - 1);
  CHECK(std::fabs(res.best_params[0] - best_t) <= grid);
  CHECK(res.energy.dirichlet <= best_e + 1e-3 * best_e);
}
