#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "latmap/cuts.hpp"
#include "latmap/lattice.hpp"

namespace latmap {

// Row-major 3x3 matrix, just enough linear algebra for Lorentz isometries.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double& operator()(int r, int c) { return m[r * 3 + c]; }
  double operator()(int r, int c) const { return m[r * 3 + c]; }

  static Mat3 identity() { return {}; }
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);
Mat3 transpose(const Mat3& a);
double frobenius_distance(const Mat3& a, const Mat3& b);

// Lorentz form J = diag(-1,-1,+1): <p,q> = p_z q_z - p_x q_x - p_y q_y.
double lorentz_dot(const Vec3& p, const Vec3& q);

// Inverse of a J-orthogonal matrix, A^{-1} = J A^T J.
Mat3 lorentz_inverse(const Mat3& a);

// Checks A^T J A = J, det = +1, future-preserving; returns the Frobenius
// defect of the first condition.
double isometry_defect(const Mat3& a);

// Radial projection v -> v / sqrt(z^2 - x^2 - y^2) onto the upper hyperboloid.
Vec3 hyperboloid_project(const Vec3& v);

double hyp_distance(const Vec3& p, const Vec3& q);

// Unit tangent at p pointing toward q (undefined for p == q).
Vec3 hyp_direction(const Vec3& p, const Vec3& q);

// The unique orientation-preserving isometry mapping the marked segment
// (p1, q1) onto (p2, q2); requires d(p1,q1) = d(p2,q2) > 0.
Mat3 isometry_from_correspondence(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                  const Vec3& q2);

// Projection of the Euclidean mean: the minimizer of sum(cosh d(., p_k) - 1).
Vec3 cosh_center(const std::vector<Vec3>& points);

struct FuchsianGroupSpec {
  int genus = 2;
  std::vector<Mat3> gens;  // a1, b1, ..., a_g, b_g
  double relation_tol = 1e-9;

  // prod_k [a_k, b_k], the surface-group relator.
  Mat3 relator() const;
  double relation_residual() const;
};

// Fundamental group of the closed genus-2 surface uniformized over the
// regular hyperbolic octagon (circumradius acosh(3 + 2*sqrt(2))); the
// relation holds to ~1e-12 by construction.
FuchsianGroupSpec octagon_group();

// Word in group generators: signed 1-based indices, e.g. {1, -2} = a1 * b1^{-1}.
using GenWord = std::vector<int>;

Mat3 word_matrix(const FuchsianGroupSpec& group, const GenWord& word);

struct HypMembrane {
  MembraneGeometry geom;
  GenWord word;
};

// Per-edge deck transformations for the canonical edge direction
// edges[e][0] -> edges[e][1], with an identity fast path.
struct EdgeTransforms {
  std::vector<Mat3> alpha;
  std::vector<char> nontrivial;

  Mat3 directed(int32_t edge, bool forward) const {
    return forward ? alpha[edge] : lorentz_inverse(alpha[edge]);
  }
};

// Builds alpha per edge as the ordered product of crossed membranes' words
// (inverted for negative crossings); verifies the product around every unit
// lattice square is the identity.
EdgeTransforms edge_transformations(const Lattice& lat,
                                    const std::vector<HypMembrane>& cuts,
                                    const FuchsianGroupSpec& group);

// Product of alpha along a closed vertex loop, first edge leftmost.
Mat3 loop_monodromy(const Lattice& lat, const EdgeTransforms& et,
                    const std::vector<int32_t>& loop);

using HypField = std::vector<Vec3>;  // per-vertex hyperboloid points

// Simultaneous update: f'(i) = cosh_center({alpha_ij f(j) : j ~ i}).
HypField cosh_cm_step(const Lattice& lat, const EdgeTransforms& et, const HypField& f);

struct HypEnergy {
  double cosh_energy = 0.0;  // sum over edges of (cosh l - 1)
  double dirichlet = 0.0;    // 1/2 sum of l^2
};

HypEnergy cosh_energy(const Lattice& lat, const EdgeTransforms& et, const HypField& f);

// Max over vertices of the hyperbolic norm of sum_j sinh(l_ij) e_ij, the
// stationarity defect of the balanced condition.
double hyp_balanced_residual(const Lattice& lat, const EdgeTransforms& et,
                             const HypField& f);

struct HypFlowOptions {
  double tol = 1e-7;      // max per-vertex hyperbolic displacement per sweep
  int max_sweeps = 5000;
};

struct HypFlowStats {
  int sweeps = 0;
  double movement = 0.0;
  bool converged = false;
  bool energy_monotone = true;
  double max_energy_increase = 0.0;
  std::vector<double> energy_trace;  // cosh-energy per sweep, length sweeps+1
};

// Cosh-center-of-mass iteration from the apex (0,0,1).
HypField harmonic_hyperbolic(const Lattice& lat, const EdgeTransforms& et,
                             const HypFlowOptions& opts, HypFlowStats* stats = nullptr,
                             const HypField* warm_start = nullptr);

// Parameterized family of groups sharing one generator labeling, so a single
// cut system (whose words reference generator indices) serves every member.
struct HypFamily {
  int dim = 0;
  std::function<FuchsianGroupSpec(const std::vector<double>&)> make;
};

// Fenchel-Nielsen-style twist: conjugates (a2, b2) by the one-parameter
// translation group along the axis of [b1, a1]; the surface relation is
// preserved for every t because the twist commutes with [a2, b2].
HypFamily fn_twist_family(const FuchsianGroupSpec& base);

// Conjugates every generator by a translation of length t along the x axis;
// a relabeling, so the harmonic energy is constant in t.
HypFamily conjugation_family(const FuchsianGroupSpec& base);

struct HypResult {
  Lattice lattice;
  FuchsianGroupSpec group;
  std::vector<double> best_params;
  HypField field;
  HypFlowStats stats;
  HypEnergy energy;
  double normalized_energy = 0.0;  // dirichlet / (4*pi*(genus-1))
  double balanced = 0.0;
  double relation_residual = 0.0;
  int search_evaluations = 0;
  std::vector<Vec3> point_map;  // hyperboloid points at cloud points
};

// Harmonic map for a fixed group.
HypResult harmonic_hyperbolic_pipeline(const PointCloud& cloud, const LatticeParams& params,
                                       const std::vector<HypMembrane>& cuts,
                                       const FuchsianGroupSpec& group,
                                       const HypFlowOptions& opts);

struct HypSearchOptions {
  HypFlowOptions flow;
  int max_evals = 60;
  double initial_step = 0.25;
  double param_tol = 1e-3;
};

// Minimizes the Dirichlet energy of the harmonic map over the family
// parameters by Nelder-Mead with warm-started fields.
HypResult conformal_hyperbolic(const PointCloud& cloud, const LatticeParams& params,
                               const std::vector<HypMembrane>& cuts, const HypFamily& family,
                               const HypSearchOptions& opts);

// Poincare-disk coordinates (x,y)/(1+z) for export.
std::array<double, 2> disk_coords(const Vec3& p);

// Dumbbell genus-2 cut system (input coordinates), matching the generated
// genus2 test surface: two z-axis handles joined by a rod along x.
std::vector<HypMembrane> genus2_dumbbell_cuts();

// Re-expresses cut membranes given in input coordinates in the normalized frame.
std::vector<HypMembrane> transform_cuts(std::vector<HypMembrane> cuts,
                                        const CloudTransform& tf);

}  // namespace latmap
