#pragma once

#include <vector>

#include "latmap/lattice.hpp"

namespace latmap {

// Graph Laplacian action (Lf)(i) = sum over neighbors j of f(j) - f(i),
// applied per component.
VertexField apply_laplacian(const Lattice& lat, const VertexField& f);

struct SolveOptions {
  double tol = 1e-8;   // relative residual target
  int max_iters = -1;  // <0 means 10 * num_vertices
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Solves Lf = 0 on the free vertices with f pinned on `pinned` (parallel to
// `pinned_values`, one value per component per pinned vertex).  Pinned
// entries are copied verbatim into the result.
VertexField solve_dirichlet(const Lattice& lat, const std::vector<int32_t>& pinned,
                            const VertexField& pinned_values, const SolveOptions& opts,
                            SolveStats* stats = nullptr);

// Solves (D - A) f = -rhs on the whole (connected) graph.  rhs must sum to
// ~zero per component; the result has zero mean per component.
VertexField solve_singular(const Lattice& lat, const VertexField& rhs,
                           const SolveOptions& opts, SolveStats* stats = nullptr);

}  // namespace latmap
