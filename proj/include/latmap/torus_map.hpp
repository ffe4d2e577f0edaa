#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "latmap/cuts.hpp"
#include "latmap/lattice.hpp"
#include "latmap/linsolve.hpp"

namespace latmap {

// Per-edge integer crossing counts against the two cut membranes, stored for
// the canonical edge direction edges[e][0] -> edges[e][1]; the reverse
// direction negates.  Membrane 1 corresponds to the lattice translation
// z -> z+1, membrane 2 to z -> z+tau.
struct ShiftCocycle {
  std::vector<std::array<int, 2>> shift;

  std::array<int, 2> directed(int32_t edge, bool forward) const {
    auto s = shift[edge];
    return forward ? s : std::array<int, 2>{-s[0], -s[1]};
  }
};

ShiftCocycle build_shift_cocycle(const Lattice& lat,
                                 const std::array<MembraneGeometry, 2>& cuts);

struct TorusBasis {
  VertexField f1, f2;  // scalar lift components, zero-mean gauge
  SolveStats stats1, stats2;
};

// Solves L f_k = b_k with b_k(i) = -sum_j s_k(i->j); the harmonic map for
// modulus tau is then f1 + tau*f2.
TorusBasis harmonic_torus_basis(const Lattice& lat, const ShiftCocycle& cocycle,
                                const SolveOptions& opts = {});

// Lifted energy E(tau) = P + 2(x*R_re + y*R_im) + (x^2+y^2)*Q for tau = x+iy.
// R_im vanishes identically for real lift components; kept so the quadratic
// form is complete.
struct EnergyCoeffs {
  double P = 0.0, Q = 0.0, R_re = 0.0, R_im = 0.0;
};

EnergyCoeffs lifted_energy_coeffs(const Lattice& lat, const ShiftCocycle& cocycle,
                                  const TorusBasis& basis);

double lifted_energy(const EnergyCoeffs& c, std::complex<double> tau);

// Closed-form minimizer of E(tau)/Im(tau) over the upper half-plane.
std::complex<double> optimal_tau(const EnergyCoeffs& c);

// Reduces tau into the standard fundamental domain |Re| <= 1/2, |tau| >= 1.
std::complex<double> sl2z_reduce(std::complex<double> tau);

// Max over vertices of |(L f_k)(i) - b_k(i)|, k = 1,2.
double balanced_residual(const Lattice& lat, const ShiftCocycle& cocycle,
                         const TorusBasis& basis);

struct TorusResult {
  Lattice lattice;
  ShiftCocycle cocycle;
  TorusBasis basis;
  EnergyCoeffs coeffs;
  std::complex<double> tau;          // optimal modulus
  std::complex<double> tau_reduced;  // SL(2,Z)-normalized
  double energy = 0.0;               // E(f_tau)
  double normalized_energy = 0.0;    // E / Im(tau)
  double residual = 0.0;
  std::vector<std::complex<double>> point_map;  // lift values at cloud points
};

// Full pipeline on a normalized genus-1 cloud; membranes already normalized.
TorusResult conformal_torus(const PointCloud& cloud, const LatticeParams& params,
                            const std::array<MembraneGeometry, 2>& cuts,
                            const SolveOptions& opts = {});

// Same lattice/cut machinery but with a caller-chosen modulus.
TorusResult harmonic_torus(const PointCloud& cloud, const LatticeParams& params,
                           const std::array<MembraneGeometry, 2>& cuts,
                           std::complex<double> tau, const SolveOptions& opts = {});

// Cut membranes for a torus of revolution around the z axis with center
// circle of radius R: membrane 1 = half-plane {y=0, x>=0} (its border, the
// z axis, threads the central hole), membrane 2 = outer annulus {z=0,
// rho>=R} (its border, the tube-center circle, is buried in the handle).
std::array<MembraneGeometry, 2> torus_revolution_cuts(double R);

}  // namespace latmap
