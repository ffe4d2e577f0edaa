#pragma once

#include <vector>

#include "latmap/lattice.hpp"
#include "latmap/pointcloud.hpp"

namespace latmap {

using SphereField = std::vector<Vec3>;  // per-vertex unit vectors

struct FlowStats {
  int iterations = 0;
  double final_residual = 0.0;       // max tangential-residual norm
  bool converged = false;
  std::vector<double> energy_trace;  // E0 per accepted iterate, length iterations+1
};

struct FlowOptions {
  double dt = 0.0;      // <=0 means 1/(2*max_degree)
  double tol = 1e-6;    // stop when max residual <= tol * mean_degree
  int max_iters = 2000;
};

Vec3 radial_project(const Vec3& v);

// Translates the mass center to the origin and re-projects each vector.
SphereField center_correction(const SphereField& field);

// Per-vertex Lf(i) minus its component along f(i).
std::vector<Vec3> tangential_residual(const Lattice& lat, const SphereField& field);

// One explicit step of the projected heat flow: displace along the tangential
// residual, radially project, then center.  Simultaneous update.
SphereField sphere_flow_step(const Lattice& lat, const SphereField& field, double dt);

double sphere_energy(const Lattice& lat, const SphereField& field);

// Runs the flow with adaptive step halving so the energy never increases.
SphereField run_sphere_flow(const Lattice& lat, const SphereField& init,
                            const FlowOptions& opts, FlowStats* stats = nullptr);

struct SphereResult {
  Lattice lattice;
  SphereField field;
  FlowStats stats;
  double initial_residual = 0.0;
  std::vector<Vec3> point_map;  // map extended to cloud points, unit vectors
};

// Full pipeline on a normalized genus-0 cloud with the origin inside.
SphereResult sphere_map_pipeline(const PointCloud& cloud, const LatticeParams& params,
                                 const FlowOptions& opts);

}  // namespace latmap
