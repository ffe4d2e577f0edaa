#include "latmap/sphere_map.hpp"

#include <algorithm>
#include <cmath>

#include "latmap/errors.hpp"

namespace latmap {

Vec3 radial_project(const Vec3& v) {
  double n = norm(v);
  if (n == 0.0) throw error(errc::degenerate, "cannot radially project the zero vector");
  return v / n;
}

SphereField center_correction(const SphereField& field) {
  Vec3 c;
  for (const auto& p : field) c += p;
  c *= 1.0 / static_cast<double>(field.size());
  SphereField out(field.size());
  for (size_t i = 0; i < field.size(); ++i) {
    Vec3 d = field[i] - c;
    if (norm(d) == 0.0)
      throw error(errc::degenerate, "a field vector coincides with the mass center");
    out[i] = radial_project(d);
  }
  return out;
}

std::vector<Vec3> tangential_residual(const Lattice& lat, const SphereField& field) {
  const int V = lat.num_vertices();
  std::vector<Vec3> out(V);
  for (int32_t v = 0; v < V; ++v) {
    Vec3 lf;
    for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t)
      lf += field[lat.adj_vtx[t]] - field[v];
    out[v] = lf - dot(lf, field[v]) * field[v];
  }
  return out;
}

namespace {

// One center pass rarely lands the mean exactly at the origin; repeating it
// converges fast and makes the mass-center invariant checkable at 1e-12.
SphereField center_to_tolerance(SphereField f) {
  for (int pass = 0; pass < 200; ++pass) {
    Vec3 c;
    for (const auto& p : f) c += p;
    c *= 1.0 / static_cast<double>(f.size());
    if (norm(c) <= 1e-12) return f;
    f = center_correction(f);
  }
  return f;
}

}  // namespace

SphereField sphere_flow_step(const Lattice& lat, const SphereField& field, double dt) {
  if (dt <= 0.0) throw error(errc::validation, "flow step size must be positive");
  auto res = tangential_residual(lat, field);
  SphereField out(field.size());
  for (size_t i = 0; i < field.size(); ++i)
    out[i] = radial_project(field[i] + dt * res[i]);
  return center_to_tolerance(std::move(out));
}

double sphere_energy(const Lattice& lat, const SphereField& field) {
  return dirichlet_energy(lat, [&](int32_t e) {
    auto [a, b] = lat.edges[e];
    return norm(field[b] - field[a]);
  });
}

SphereField run_sphere_flow(const Lattice& lat, const SphereField& init,
                            const FlowOptions& opts, FlowStats* stats) {
  int max_degree = 0, total_degree = 0;
  for (int32_t v = 0; v < lat.num_vertices(); ++v) {
    int deg = lat.adj_off[v + 1] - lat.adj_off[v];
    max_degree = std::max(max_degree, deg);
    total_degree += deg;
  }
  double mean_degree =
      lat.num_vertices() > 0 ? double(total_degree) / lat.num_vertices() : 0.0;
  double dt0 = opts.dt > 0.0 ? opts.dt : 1.0 / (2.0 * std::max(1, max_degree));
  double threshold = opts.tol * mean_degree;

  auto max_residual = [&](const SphereField& f) {
    double m = 0.0;
    for (const auto& r : tangential_residual(lat, f)) m = std::max(m, norm(r));
    return m;
  };

  SphereField f = center_to_tolerance(init);
  FlowStats st;
  double energy = sphere_energy(lat, f);
  st.energy_trace.push_back(energy);
  st.final_residual = max_residual(f);

  while (st.final_residual > threshold && st.iterations < opts.max_iters) {
    double dt = dt0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      SphereField cand = sphere_flow_step(lat, f, dt);
      double e_cand = sphere_energy(lat, cand);
      if (e_cand <= energy * (1.0 + 1e-14)) {
        f = std::move(cand);
        energy = e_cand;
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) break;  // numerically stationary; residual check decides below
    ++st.iterations;
    st.energy_trace.push_back(energy);
    st.final_residual = max_residual(f);
  }
  st.converged = st.final_residual <= threshold;
  if (stats) *stats = st;
  return f;
}

SphereResult sphere_map_pipeline(const PointCloud& cloud, const LatticeParams& params,
                                 const FlowOptions& opts) {
  SphereResult res;
  res.lattice = build_lattice(cloud, params);
  SphereField init(res.lattice.num_vertices());
  for (int32_t v = 0; v < res.lattice.num_vertices(); ++v) {
    const Vec3& x = res.lattice.coords[v];
    if (norm(x) < 1e-6)
      throw error(errc::validation,
                  "a lattice vertex sits at the origin; radial initialization undefined");
    init[v] = radial_project(x);
  }
  {
    double m = 0.0;
    for (const auto& r : tangential_residual(res.lattice, init)) m = std::max(m, norm(r));
    res.initial_residual = m;
  }
  res.field = run_sphere_flow(res.lattice, init, opts, &res.stats);

  VertexField comps;
  comps.comps = 3;
  comps.data.resize(static_cast<size_t>(3) * res.lattice.num_vertices());
  for (int32_t v = 0; v < res.lattice.num_vertices(); ++v)
    for (int c = 0; c < 3; ++c) comps.at(c, v) = res.field[v][c];

  res.point_map.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    auto t = trilinear_interpolate(res.lattice, comps, p);
    res.point_map.push_back(radial_project({t[0], t[1], t[2]}));
  }
  return res;
}

}  // namespace latmap
