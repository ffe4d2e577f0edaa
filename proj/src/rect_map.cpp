#include "latmap/rect_map.hpp"

#include <algorithm>
#include <cmath>

#include "latmap/errors.hpp"

namespace latmap {

namespace {

VertexField pin_values(const std::vector<int32_t>& zeros, const std::vector<int32_t>& ones,
                       std::vector<int32_t>& pinned) {
  pinned.clear();
  pinned.insert(pinned.end(), zeros.begin(), zeros.end());
  pinned.insert(pinned.end(), ones.begin(), ones.end());
  VertexField vals;
  vals.comps = 1;
  vals.data.assign(pinned.size(), 0.0);
  for (size_t i = zeros.size(); i < pinned.size(); ++i) vals.data[i] = 1.0;
  return vals;
}

}  // namespace

UnitHarmonicPair solve_unit_harmonic(const Lattice& lat, const BoundarySets& sets,
                                     const SolveOptions& opts) {
  UnitHarmonicPair out;
  std::vector<int32_t> pinned;
  // u1: 0 on V4, 1 on V2; u2: 0 on V1, 1 on V3.
  VertexField v1 = pin_values(sets[3], sets[1], pinned);
  out.u1 = solve_dirichlet(lat, pinned, v1, opts, &out.stats1);
  VertexField v2 = pin_values(sets[0], sets[2], pinned);
  out.u2 = solve_dirichlet(lat, pinned, v2, opts, &out.stats2);
  return out;
}

RectangleMap harmonic_rectangle(const UnitHarmonicPair& pair, double a) {
  if (a <= 0.0) throw error(errc::validation, "rectangle parameter must be positive");
  RectangleMap map;
  map.a = a;
  size_t V = pair.u1.data.size();
  map.uv.resize(V);
  for (size_t v = 0; v < V; ++v)
    map.uv[v] = {pair.u1.data[v] / a, a * pair.u2.data[v]};
  return map;
}

double field_dirichlet_energy(const Lattice& lat, const VertexField& u) {
  return dirichlet_energy(lat, [&](int32_t e) {
    auto [a, b] = lat.edges[e];
    return u.data[b] - u.data[a];
  });
}

RectParameter optimal_rectangle_parameter(const Lattice& lat, const UnitHarmonicPair& pair) {
  RectParameter p;
  p.E1 = field_dirichlet_energy(lat, pair.u1);
  p.E2 = field_dirichlet_energy(lat, pair.u2);
  if (p.E1 <= 0.0 || p.E2 <= 0.0)
    throw error(errc::degenerate, "degenerate boundary constraints: zero Dirichlet energy");
  p.a_bar = std::pow(p.E1 / p.E2, 0.25);
  return p;
}

RectResult conformal_rectangle(const PointCloud& cloud, const LatticeParams& params,
                               const SolveOptions& opts) {
  RectResult res;
  res.lattice = build_lattice(cloud, params);
  res.sets = boundary_vertex_sets(res.lattice, cloud);
  res.pair = solve_unit_harmonic(res.lattice, res.sets, opts);
  res.param = optimal_rectangle_parameter(res.lattice, res.pair);
  res.energy = 2.0 * std::sqrt(res.param.E1 * res.param.E2);
  res.conformality_gap = res.energy - 1.0;

  // Vertices shared by adjacent arcs are pinned to the rectangle corners.
  auto count_shared = [](const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
    int n = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) ++i;
      else if (a[i] > b[j]) ++j;
      else { ++n; ++i; ++j; }
    }
    return n;
  };
  for (int k = 0; k < 4; ++k)
    res.corner_vertices += count_shared(res.sets[k], res.sets[(k + 1) % 4]);

  VertexField both;
  both.comps = 2;
  both.data = res.pair.u1.data;
  both.data.insert(both.data.end(), res.pair.u2.data.begin(), res.pair.u2.data.end());
  res.point_uv.reserve(cloud.points.size());
  double a = res.param.a_bar;
  for (const auto& p : cloud.points) {
    auto uv = trilinear_interpolate(res.lattice, both, p);
    res.point_uv.push_back({uv[0] / a, a * uv[1]});
  }
  return res;
}

}  // namespace latmap
