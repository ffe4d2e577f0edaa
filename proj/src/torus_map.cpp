#include "latmap/torus_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latmap/errors.hpp"

namespace latmap {

namespace {

std::array<int, 2> directed_shift(const Lattice& lat, const ShiftCocycle& c, int32_t a,
                                  int32_t b) {
  int32_t e = edge_between(lat, a, b);
  return c.directed(e, lat.edges[e][0] == a);
}

}  // namespace

ShiftCocycle build_shift_cocycle(const Lattice& lat,
                                 const std::array<MembraneGeometry, 2>& cuts) {
  ShiftCocycle c;
  c.shift.resize(lat.num_edges());
  for (int32_t e = 0; e < lat.num_edges(); ++e) {
    const Vec3& p = lat.coords[lat.edges[e][0]];
    const Vec3& q = lat.coords[lat.edges[e][1]];
    c.shift[e] = {membrane_crossing(cuts[0], p, q).sign,
                  membrane_crossing(cuts[1], p, q).sign};
  }

  for_each_unit_square(lat, [&](int32_t v00, int32_t v10, int32_t v11, int32_t v01) {
    int32_t loop[5] = {v00, v10, v11, v01, v00};
    int sum[2] = {0, 0};
    for (int s = 0; s < 4; ++s) {
      auto sh = directed_shift(lat, c, loop[s], loop[s + 1]);
      sum[0] += sh[0];
      sum[1] += sh[1];
    }
    if (sum[0] != 0 || sum[1] != 0) {
      const auto& nd = lat.nodes[v00];
      throw error(errc::validation,
                  "membrane intersects lattice non-transversally at square (" +
                      std::to_string(nd[0]) + "," + std::to_string(nd[1]) + "," +
                      std::to_string(nd[2]) + ")");
    }
  });
  return c;
}

TorusBasis harmonic_torus_basis(const Lattice& lat, const ShiftCocycle& cocycle,
                                const SolveOptions& opts) {
  const int V = lat.num_vertices();
  VertexField rhs;
  rhs.comps = 1;
  rhs.data.assign(V, 0.0);

  TorusBasis basis;
  for (int k = 0; k < 2; ++k) {
    std::fill(rhs.data.begin(), rhs.data.end(), 0.0);
    // b(i) = -sum_j s(i->j); each edge contributes to both endpoints with
    // opposite signs, so the total is zero in exact integer arithmetic.
    for (int32_t e = 0; e < lat.num_edges(); ++e) {
      int s = cocycle.shift[e][k];
      if (s == 0) continue;
      rhs.data[lat.edges[e][0]] -= s;
      rhs.data[lat.edges[e][1]] += s;
    }
    auto& f = k == 0 ? basis.f1 : basis.f2;
    auto& st = k == 0 ? basis.stats1 : basis.stats2;
    f = solve_singular(lat, rhs, opts, &st);
  }
  return basis;
}

namespace {

// Lifted difference along the canonical edge direction a -> b.
inline double lifted_delta(const Lattice& lat, const ShiftCocycle& c, const VertexField& f,
                           int comp, int32_t e) {
  auto [a, b] = lat.edges[e];
  return f.data[b] + c.shift[e][comp] - f.data[a];
}

}  // namespace

EnergyCoeffs lifted_energy_coeffs(const Lattice& lat, const ShiftCocycle& cocycle,
                                  const TorusBasis& basis) {
  EnergyCoeffs c;
  for (int32_t e = 0; e < lat.num_edges(); ++e) {
    double d1 = lifted_delta(lat, cocycle, basis.f1, 0, e);
    double d2 = lifted_delta(lat, cocycle, basis.f2, 1, e);
    c.P += 0.5 * d1 * d1;
    c.Q += 0.5 * d2 * d2;
    c.R_re += 0.5 * d1 * d2;
  }
  return c;
}

double lifted_energy(const EnergyCoeffs& c, std::complex<double> tau) {
  double x = tau.real(), y = tau.imag();
  return c.P + 2.0 * (x * c.R_re + y * c.R_im) + (x * x + y * y) * c.Q;
}

std::complex<double> optimal_tau(const EnergyCoeffs& c) {
  if (c.Q <= 0.0) throw error(errc::degenerate, "degenerate cut data: Q = 0");
  double x = -c.R_re / c.Q;
  double disc = (c.P + 2.0 * x * c.R_re + x * x * c.Q) / c.Q;
  if (disc <= 0.0)
    throw error(errc::degenerate, "degenerate cut data: non-positive discriminant");
  return {x, std::sqrt(disc)};
}

std::complex<double> sl2z_reduce(std::complex<double> tau) {
  for (int i = 0; i < 100; ++i) {
    tau -= std::round(tau.real());
    if (std::abs(tau) < 1.0 - 1e-15)
      tau = -1.0 / tau;
    else
      break;
  }
  return tau;
}

double balanced_residual(const Lattice& lat, const ShiftCocycle& cocycle,
                         const TorusBasis& basis) {
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const VertexField& f = k == 0 ? basis.f1 : basis.f2;
    for (int32_t v = 0; v < lat.num_vertices(); ++v) {
      double acc = 0.0;
      for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
        int32_t e = lat.adj_edge[t];
        double d = lifted_delta(lat, cocycle, f, k, e);
        acc += lat.edges[e][0] == v ? d : -d;
      }
      worst = std::max(worst, std::fabs(acc));
    }
  }
  return worst;
}

namespace {

TorusResult torus_common(const PointCloud& cloud, const LatticeParams& params,
                         const std::array<MembraneGeometry, 2>& cuts,
                         const SolveOptions& opts) {
  TorusResult res;
  res.lattice = build_lattice(cloud, params);
  res.cocycle = build_shift_cocycle(res.lattice, cuts);
  res.basis = harmonic_torus_basis(res.lattice, res.cocycle, opts);
  res.coeffs = lifted_energy_coeffs(res.lattice, res.cocycle, res.basis);
  res.residual = balanced_residual(res.lattice, res.cocycle, res.basis);
  return res;
}

void finish_torus(TorusResult& res, const PointCloud& cloud, std::complex<double> tau) {
  res.tau = tau;
  res.tau_reduced = sl2z_reduce(tau);
  res.energy = lifted_energy(res.coeffs, tau);
  res.normalized_energy = res.energy / tau.imag();

  // Extend the lift components to cloud points.  The eight corner values of
  // a cell are lifted coherently by accumulating shifts along in-cell edge
  // paths from the base corner before blending.
  const Lattice& lat = res.lattice;
  res.point_map.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    auto base = locate_cell(lat, p);
    if (!base) throw error(errc::validation, "point outside lattice hull");
    auto corners = *lat.cell((*base)[0], (*base)[1], (*base)[2]);

    double u[3];
    for (int a = 0; a < 3; ++a) u[a] = p[a] * lat.n - (*base)[a];

    double acc1 = 0.0, acc2 = 0.0;
    for (int idx = 0; idx < 8; ++idx) {
      int d[3] = {idx & 1, (idx >> 1) & 1, (idx >> 2) & 1};
      double w = (d[0] ? u[0] : 1 - u[0]) * (d[1] ? u[1] : 1 - u[1]) *
                 (d[2] ? u[2] : 1 - u[2]);
      // Walk x then y then z from the base corner to this corner.
      int at[3] = {(*base)[0], (*base)[1], (*base)[2]};
      int32_t cur = corners[0];
      int s1 = 0, s2 = 0;
      for (int a = 0; a < 3; ++a) {
        if (!d[a]) continue;
        ++at[a];
        int32_t nxt = lat.find(at[0], at[1], at[2]);
        auto sh = directed_shift(lat, res.cocycle, cur, nxt);
        s1 += sh[0];
        s2 += sh[1];
        cur = nxt;
      }
      acc1 += w * (res.basis.f1.data[corners[idx]] + s1);
      acc2 += w * (res.basis.f2.data[corners[idx]] + s2);
    }
    res.point_map.emplace_back(acc1 + tau * acc2);
  }
}

}  // namespace

TorusResult conformal_torus(const PointCloud& cloud, const LatticeParams& params,
                            const std::array<MembraneGeometry, 2>& cuts,
                            const SolveOptions& opts) {
  TorusResult res = torus_common(cloud, params, cuts, opts);
  finish_torus(res, cloud, optimal_tau(res.coeffs));
  return res;
}

TorusResult harmonic_torus(const PointCloud& cloud, const LatticeParams& params,
                           const std::array<MembraneGeometry, 2>& cuts,
                           std::complex<double> tau, const SolveOptions& opts) {
  if (tau.imag() <= 0.0)
    throw error(errc::validation, "torus modulus must have positive imaginary part");
  TorusResult res = torus_common(cloud, params, cuts, opts);
  finish_torus(res, cloud, tau);
  return res;
}

std::array<MembraneGeometry, 2> torus_revolution_cuts(double R) {
  MembraneGeometry m1;
  m1.normal = {0, 1, 0};
  m1.offset = 0.0;
  m1.sides.push_back({{1, 0, 0}, 0.0, false});

  MembraneGeometry m2;
  m2.normal = {0, 0, 1};
  m2.offset = 0.0;
  RadialBound rb;
  rb.center = {0, 0, 0};
  rb.r_lo = R;
  rb.lo_strict = true;
  m2.radial.push_back(rb);
  return {m1, m2};
}

}  // namespace latmap
