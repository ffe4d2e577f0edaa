#pragma once

#include <limits>
#include <vector>

#include "latmap/pointcloud.hpp"
#include "latmap/vec3.hpp"

namespace latmap {

// Supporting predicates restricting a membrane to a patch of its plane.
// Evaluated at the point where a segment pierces the plane.
struct HalfSpace {
  Vec3 normal;
  double offset = 0.0;
  bool strict = false;  // strict: n.p > offset, else n.p >= offset
};

struct RadialBound {
  Vec3 center;  // measured within the membrane plane
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();
  bool lo_strict = false;  // strict: rho > r_lo, else rho >= r_lo
  bool hi_strict = false;
};

// Oriented planar patch cutting the lattice: the plane normal.p = offset
// restricted by half-space and radial conditions.  Crossing sign is +1 when
// a segment passes from the negative to the nonnegative side of the plane
// (points exactly on the plane count as the positive side).
struct MembraneGeometry {
  Vec3 normal;
  double offset = 0.0;
  std::vector<HalfSpace> sides;
  std::vector<RadialBound> radial;
};

struct Crossing {
  int sign = 0;   // -1, 0, +1
  double t = 0.0; // crossing parameter along p->q, valid when sign != 0
};

bool membrane_contains(const MembraneGeometry& m, const Vec3& p);

Crossing membrane_crossing(const MembraneGeometry& m, const Vec3& p, const Vec3& q);

// Re-expresses a membrane given in input coordinates in the normalized frame.
MembraneGeometry transform_membrane(const MembraneGeometry& m, const CloudTransform& tf);

}  // namespace latmap
