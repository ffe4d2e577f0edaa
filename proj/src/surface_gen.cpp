#include "latmap/surface_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "latmap/errors.hpp"

namespace latmap {

namespace {

constexpr double kPi = 3.14159265358979323846;

// mt19937_64 bits mapped to doubles by hand so streams are identical across
// standard libraries; distribution classes are implementation-defined.
struct Rng {
  std::mt19937_64 gen;
  double spare = 0.0;
  bool has_spare = false;

  explicit Rng(uint64_t seed) : gen(seed) {}

  double uniform() { return (gen() >> 11) * 0x1.0p-53; }  // [0, 1)

  double gaussian() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    double m = std::sqrt(-2.0 * std::log(u1));
    spare = m * std::sin(2.0 * kPi * u2);
    has_spare = true;
    return m * std::cos(2.0 * kPi * u2);
  }

  Vec3 unit_vector() {
    while (true) {
      Vec3 v{gaussian(), gaussian(), gaussian()};
      double n = norm(v);
      if (n > 1e-12) return v / n;
    }
  }
};

void check_count(int count) {
  if (count <= 0) throw error(errc::validation, "point count must be positive");
}

}  // namespace

PointCloud gen_sphere(int count, uint64_t seed) {
  check_count(count);
  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(count);
  for (int i = 0; i < count; ++i) cloud.points.push_back(rng.unit_vector());
  return cloud;
}

PointCloud gen_ellipsoid(double rx, double ry, double rz, int count, uint64_t seed) {
  check_count(count);
  if (rx <= 0.0 || ry <= 0.0 || rz <= 0.0)
    throw error(errc::validation, "ellipsoid semi-axes must be positive");
  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(count);
  // Area-weighted rejection from the unit-sphere parameterization: the
  // Jacobian is |(ry*rz*u1, rx*rz*u2, rx*ry*u3)|, bounded by the largest
  // pairwise product.
  double wmax = std::max({ry * rz, rx * rz, rx * ry});
  while (static_cast<int>(cloud.points.size()) < count) {
    Vec3 u = rng.unit_vector();
    double w = norm(Vec3{ry * rz * u.x, rx * rz * u.y, rx * ry * u.z});
    if (rng.uniform() * wmax <= w) cloud.points.push_back({rx * u.x, ry * u.y, rz * u.z});
  }
  return cloud;
}

PointCloud gen_slab(double lx, double ly, int count, uint64_t seed, double boundary_frac) {
  check_count(count);
  if (lx <= 0.0 || ly <= 0.0) throw error(errc::validation, "slab sides must be positive");
  if (boundary_frac < 0.0 || boundary_frac > 1.0)
    throw error(errc::validation, "boundary fraction must lie in [0, 1]");
  int nb = static_cast<int>(std::lround(boundary_frac * count));
  nb = std::clamp(nb, 8, count);  // at least the corners plus one per side

  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.labels.reserve(count);
  auto push = [&](double x, double y, int label) {
    cloud.points.push_back({x, y, 0.0});
    cloud.labels.push_back(label);
  };

  // Sides: bottom=1 (y=0), right=2 (x=lx), top=3 (y=ly), left=4 (x=0).
  auto side_point = [&](int side, double t) {
    switch (side) {
      case 1: push(t * lx, 0.0, 1); break;
      case 2: push(lx, t * ly, 2); break;
      case 3: push(t * lx, ly, 3); break;
      default: push(0.0, t * ly, 4); break;
    }
  };

  push(0.0, 0.0, 1);
  push(lx, 0.0, 2);
  push(lx, ly, 3);
  push(0.0, ly, 4);
  for (int side = 1; side <= 4; ++side) side_point(side, rng.uniform());
  double perim = 2.0 * (lx + ly);
  for (int i = 8; i < nb; ++i) {
    double s = rng.uniform() * perim;
    if (s < lx) side_point(1, s / lx);
    else if (s < lx + ly) side_point(2, (s - lx) / ly);
    else if (s < 2.0 * lx + ly) side_point(3, (s - lx - ly) / lx);
    else side_point(4, (s - 2.0 * lx - ly) / ly);
  }
  for (int i = nb; i < count; ++i) push(rng.uniform() * lx, rng.uniform() * ly, 0);
  return cloud;
}

PointCloud gen_torus(double R, double r, int count, uint64_t seed) {
  check_count(count);
  if (r <= 0.0 || R <= r)
    throw error(errc::validation, "torus radii must satisfy R > r > 0");
  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(count);
  while (static_cast<int>(cloud.points.size()) < count) {
    double phi = 2.0 * kPi * rng.uniform();
    // area element is proportional to R + r*cos(phi)
    if (rng.uniform() * (R + r) > R + r * std::cos(phi)) continue;
    double theta = 2.0 * kPi * rng.uniform();
    double rho = R + r * std::cos(phi);
    cloud.points.push_back({rho * std::cos(theta), rho * std::sin(theta), r * std::sin(phi)});
  }
  return cloud;
}

double genus2_implicit(const Genus2Shape& s, const Vec3& p) {
  // Distances to the two handle tori (axes parallel to z through (-c,0,0)
  // and (+c,0,0)) and to the connecting capsule, blended by a smooth min.
  // The smooth min only pushes the surface outward from the plain union.
  auto torus_dist = [&](double cx) {
    double rho = std::hypot(p.x - cx, p.y);
    return std::hypot(rho - s.R, p.z) - s.r;
  };
  double a = s.c - s.R;  // rod reaches the inner rims of the core circles
  double xc = std::clamp(p.x, -a, a);
  double g1 = torus_dist(-s.c);
  double g2 = torus_dist(s.c);
  double g3 = std::sqrt((p.x - xc) * (p.x - xc) + p.y * p.y + p.z * p.z) - s.rod_r;
  double m = std::min({g1, g2, g3});
  double sum = std::exp(-s.blend * (g1 - m)) + std::exp(-s.blend * (g2 - m)) +
               std::exp(-s.blend * (g3 - m));
  return m - std::log(sum) / s.blend;
}

PointCloud gen_genus2(const Genus2Shape& s, int count, uint64_t seed) {
  check_count(count);
  Rng rng(seed);
  const double bx = s.c + s.R + s.r + 0.1;
  const double by = s.R + s.r + 0.2;
  const double bz = s.r + 0.15;
  PointCloud cloud;
  cloud.points.reserve(count);
  while (static_cast<int>(cloud.points.size()) < count) {
    Vec3 p{(2.0 * rng.uniform() - 1.0) * bx, (2.0 * rng.uniform() - 1.0) * by,
           (2.0 * rng.uniform() - 1.0) * bz};
    // Newton steps along the numerical gradient onto the zero level set.
    bool ok = false;
    for (int it = 0; it < 30; ++it) {
      double f = genus2_implicit(s, p);
      if (std::abs(f) < 1e-12) {
        ok = true;
        break;
      }
      const double h = 1e-6;
      Vec3 g{(genus2_implicit(s, {p.x + h, p.y, p.z}) - genus2_implicit(s, {p.x - h, p.y, p.z})) /
                 (2.0 * h),
             (genus2_implicit(s, {p.x, p.y + h, p.z}) - genus2_implicit(s, {p.x, p.y - h, p.z})) /
                 (2.0 * h),
             (genus2_implicit(s, {p.x, p.y, p.z + h}) - genus2_implicit(s, {p.x, p.y, p.z - h})) /
                 (2.0 * h)};
      double n2 = norm2(g);
      if (n2 < 1e-16) break;
      p -= (f / n2) * g;
    }
    if (ok && std::abs(p.x) <= bx && std::abs(p.y) <= by && std::abs(p.z) <= bz)
      cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace latmap
