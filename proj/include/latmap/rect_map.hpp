#pragma once

#include <array>
#include <vector>

#include "latmap/lattice.hpp"
#include "latmap/linsolve.hpp"
#include "latmap/pointcloud.hpp"

namespace latmap {

using BoundarySets = std::array<std::vector<int32_t>, 4>;

// u1 is 0 on V4 and 1 on V2, u2 is 0 on V1 and 1 on V3, both harmonic on the
// free vertices.  The map to the rectangle [0,1/a] x [0,a] is (u1/a, a*u2).
struct UnitHarmonicPair {
  VertexField u1, u2;
  SolveStats stats1, stats2;
};

UnitHarmonicPair solve_unit_harmonic(const Lattice& lat, const BoundarySets& sets,
                                     const SolveOptions& opts = {});

struct RectangleMap {
  double a = 1.0;
  std::vector<std::array<double, 2>> uv;  // per-vertex target coordinates
};

RectangleMap harmonic_rectangle(const UnitHarmonicPair& pair, double a);

// Closed-form minimizer of E(f_a) = E1/a^2 + a^2*E2 over a > 0, where E1, E2
// are the Dirichlet energies of u1, u2.
struct RectParameter {
  double a_bar = 1.0;
  double E1 = 0.0, E2 = 0.0;
};

double field_dirichlet_energy(const Lattice& lat, const VertexField& u);

RectParameter optimal_rectangle_parameter(const Lattice& lat, const UnitHarmonicPair& pair);

struct RectResult {
  Lattice lattice;
  BoundarySets sets;
  UnitHarmonicPair pair;
  RectParameter param;
  double energy = 0.0;            // E(f_a_bar) = 2*sqrt(E1*E2)
  double conformality_gap = 0.0;  // energy - 1
  int corner_vertices = 0;        // vertices pinned by two adjacent arcs
  std::vector<std::array<double, 2>> point_uv;  // map extended to cloud points
};

// Full pipeline on a normalized, labeled cloud: lattice, boundary sets, unit
// solves, optimal a, trilinear extension of (u1/a, a*u2) to the points.
RectResult conformal_rectangle(const PointCloud& cloud, const LatticeParams& params,
                               const SolveOptions& opts = {});

}  // namespace latmap
