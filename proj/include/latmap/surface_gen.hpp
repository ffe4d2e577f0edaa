#pragma once

#include <cstdint>

#include "latmap/pointcloud.hpp"

namespace latmap {

PointCloud gen_sphere(int count, uint64_t seed);

PointCloud gen_ellipsoid(double rx, double ry, double rz, int count, uint64_t seed);

// Flat rectangle lx x ly in the z=0 plane; boundary_frac of the points sit
// exactly on the four sides, labeled bottom=1, right=2, top=3, left=4.
PointCloud gen_slab(double lx, double ly, int count, uint64_t seed,
                    double boundary_frac = 0.1);

PointCloud gen_torus(double R, double r, int count, uint64_t seed);

// Genus-2 dumbbell: two tori of revolution around z-axis-parallel axes with
// center circles of radius R around (-c,0,0) and (+c,0,0), tube radius r,
// joined by a capsule rod along the x axis; blended with a smooth minimum.
struct Genus2Shape {
  double R = 1.0;
  double r = 0.5;
  double c = 1.6;
  double rod_r = 0.5;
  double blend = 12.0;  // smooth-min sharpness
};

double genus2_implicit(const Genus2Shape& s, const Vec3& p);

PointCloud gen_genus2(const Genus2Shape& s, int count, uint64_t seed);

}  // namespace latmap
