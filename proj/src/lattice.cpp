#include "latmap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "latmap/errors.hpp"

namespace latmap {

std::optional<std::array<int32_t, 8>> Lattice::cell(int i, int j, int k) const {
  std::array<int32_t, 8> c;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        int32_t v = find(i + dx, j + dy, k + dz);
        if (v < 0) return std::nullopt;
        c[dx + 2 * dy + 4 * dz] = v;
      }
  return c;
}

Lattice build_lattice(const PointCloud& cloud, const LatticeParams& params) {
  Lattice lat;
  lat.n = params.n;
  if (lat.n < 2) throw error(errc::validation, "lattice resolution must be at least 2");
  lat.h = 1.0 / lat.n;
  lat.epsilon = params.epsilon > 0.0 ? params.epsilon : 2.5 / lat.n;
  // Below sqrt(3)/(2n) even the node nearest a point can fall outside the
  // ball, so the graph can miss the cloud entirely.
  if (lat.epsilon < std::sqrt(3.0) / (2.0 * lat.n))
    throw error(errc::validation, "epsilon too small for resolution: need >= sqrt(3)/(2n)");

  const double eps2 = lat.epsilon * lat.epsilon;
  const double n = lat.n;

  // Collect candidate nodes per point; a node may be hit by several points,
  // keep the smallest distance so cloud_dist is exact for retained nodes.
  std::unordered_map<uint64_t, double> best;
  for (const auto& p : cloud.points) {
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = static_cast<int>(std::ceil((p[a] - lat.epsilon) * n));
      hi[a] = static_cast<int>(std::floor((p[a] + lat.epsilon) * n));
    }
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int k = lo[2]; k <= hi[2]; ++k) {
          Vec3 d = {i * lat.h - p.x, j * lat.h - p.y, k * lat.h - p.z};
          double d2 = norm2(d);
          if (d2 >= eps2) continue;
          auto [it, fresh] = best.try_emplace(Lattice::key(i, j, k), d2);
          if (!fresh && d2 < it->second) it->second = d2;
        }
  }
  if (best.empty())
    throw error(errc::validation, "no lattice vertices within epsilon of the cloud");

  std::vector<uint64_t> keys;
  keys.reserve(best.size());
  for (const auto& [k, _] : best) keys.push_back(k);
  std::sort(keys.begin(), keys.end());  // packed keys preserve lex order

  constexpr int64_t off = int64_t(1) << 20;
  constexpr uint64_t mask = (uint64_t(1) << 21) - 1;
  lat.nodes.reserve(keys.size());
  lat.coords.reserve(keys.size());
  lat.cloud_dist.reserve(keys.size());
  lat.index.reserve(keys.size());
  lat.min_cloud_dist = std::numeric_limits<double>::infinity();
  lat.max_cloud_dist = 0.0;
  for (uint64_t key : keys) {
    int i = static_cast<int>(int64_t((key >> 42) & mask) - off);
    int j = static_cast<int>(int64_t((key >> 21) & mask) - off);
    int k = static_cast<int>(int64_t(key & mask) - off);
    lat.index.emplace(key, static_cast<int32_t>(lat.nodes.size()));
    lat.nodes.push_back({i, j, k});
    lat.coords.push_back({i * lat.h, j * lat.h, k * lat.h});
    double d = std::sqrt(best[key]);
    lat.cloud_dist.push_back(d);
    lat.min_cloud_dist = std::min(lat.min_cloud_dist, d);
    lat.max_cloud_dist = std::max(lat.max_cloud_dist, d);
  }

  // Axis edges; scanning +x/+y/+z from each node finds each edge once.
  for (int32_t v = 0; v < lat.num_vertices(); ++v) {
    auto [i, j, k] = lat.nodes[v];
    for (int a = 0; a < 3; ++a) {
      int32_t w = lat.find(i + (a == 0), j + (a == 1), k + (a == 2));
      if (w >= 0) lat.edges.push_back({std::min(v, w), std::max(v, w)});
    }
  }

  // CSR adjacency.
  const int V = lat.num_vertices();
  lat.adj_off.assign(V + 1, 0);
  for (const auto& e : lat.edges) {
    ++lat.adj_off[e[0] + 1];
    ++lat.adj_off[e[1] + 1];
  }
  for (int v = 0; v < V; ++v) lat.adj_off[v + 1] += lat.adj_off[v];
  lat.adj_vtx.resize(lat.edges.size() * 2);
  lat.adj_edge.resize(lat.edges.size() * 2);
  std::vector<int32_t> cursor(lat.adj_off.begin(), lat.adj_off.end() - 1);
  for (int32_t e = 0; e < lat.num_edges(); ++e) {
    auto [a, b] = lat.edges[e];
    lat.adj_vtx[cursor[a]] = b;
    lat.adj_edge[cursor[a]++] = e;
    lat.adj_vtx[cursor[b]] = a;
    lat.adj_edge[cursor[b]++] = e;
  }

  // Connectivity check (BFS); multiple components mean epsilon or n is off.
  std::vector<int32_t> comp(V, -1);
  int n_comp = 0;
  std::vector<int32_t> stack;
  for (int32_t s = 0; s < V; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = n_comp;
    stack.push_back(s);
    while (!stack.empty()) {
      int32_t v = stack.back();
      stack.pop_back();
      for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
        int32_t w = lat.adj_vtx[t];
        if (comp[w] < 0) {
          comp[w] = n_comp;
          stack.push_back(w);
        }
      }
    }
    ++n_comp;
  }
  if (n_comp != 1)
    throw error(errc::disconnected, "lattice graph has " + std::to_string(n_comp) +
                                        " components; increase epsilon or point density");

  return lat;
}

namespace {

// Grid cell containing p, with a fallback for points sitting exactly on a
// grid plane: try base-1 on axes whose fractional part vanishes, taking the
// first candidate whose eight corners all exist.
std::array<int, 3> containing_cell(const Lattice& lat, const Vec3& p, bool* found) {
  std::array<int, 3> base;
  std::array<bool, 3> on_grid;
  for (int a = 0; a < 3; ++a) {
    double s = p[a] * lat.n;
    base[a] = static_cast<int>(std::floor(s));
    on_grid[a] = std::fabs(s - base[a]) < 1e-12 || std::fabs(s - (base[a] + 1)) < 1e-12;
    if (std::fabs(s - (base[a] + 1)) < 1e-12) base[a] += 1;
  }
  for (int m = 0; m < 8; ++m) {
    std::array<int, 3> cand = base;
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      if (m & (1 << a)) {
        if (!on_grid[a]) { ok = false; break; }
        cand[a] -= 1;
      }
    }
    if (!ok) continue;
    if (lat.cell(cand[0], cand[1], cand[2])) {
      *found = true;
      return cand;
    }
  }
  *found = false;
  return base;
}

}  // namespace

std::optional<std::array<int, 3>> locate_cell(const Lattice& lat, const Vec3& p) {
  bool found = false;
  auto c = containing_cell(lat, p, &found);
  if (!found) return std::nullopt;
  return c;
}

int32_t edge_between(const Lattice& lat, int32_t a, int32_t b) {
  for (int32_t t = lat.adj_off[a]; t < lat.adj_off[a + 1]; ++t)
    if (lat.adj_vtx[t] == b) return lat.adj_edge[t];
  return -1;
}

std::array<std::vector<int32_t>, 4> boundary_vertex_sets(const Lattice& lat,
                                                         const PointCloud& cloud) {
  if (!cloud.has_labels())
    throw error(errc::validation, "point cloud has no boundary labels");

  std::array<std::vector<int32_t>, 4> sets;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    int label = cloud.labels[i];
    if (label == 0) continue;
    bool found = false;
    auto c = containing_cell(lat, cloud.points[i], &found);
    if (!found)
      throw error(errc::validation,
                  "boundary point lies in an incomplete lattice cell; increase epsilon");
    auto corners = lat.cell(c[0], c[1], c[2]);
    for (int32_t v : *corners) sets[label - 1].push_back(v);
  }
  for (auto& s : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  auto intersects = [](const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) ++i;
      else if (a[i] > b[j]) ++j;
      else return true;
    }
    return false;
  };
  if (intersects(sets[0], sets[2]) || intersects(sets[1], sets[3]))
    throw error(errc::validation,
                "opposite boundary arcs touch on the lattice; increase resolution");
  return sets;
}

std::vector<double> trilinear_interpolate(const Lattice& lat, const VertexField& field,
                                          const Vec3& p) {
  bool found = false;
  auto c = containing_cell(lat, p, &found);
  if (!found) throw error(errc::validation, "point outside lattice hull");
  auto corners = *lat.cell(c[0], c[1], c[2]);

  double u[3];
  for (int a = 0; a < 3; ++a) u[a] = p[a] * lat.n - c[a];

  std::vector<double> out(field.comps, 0.0);
  for (int idx = 0; idx < 8; ++idx) {
    int dx = idx & 1, dy = (idx >> 1) & 1, dz = (idx >> 2) & 1;
    double w = (dx ? u[0] : 1.0 - u[0]) * (dy ? u[1] : 1.0 - u[1]) * (dz ? u[2] : 1.0 - u[2]);
    for (int comp = 0; comp < field.comps; ++comp)
      out[comp] += w * field.at(comp, corners[idx]);
  }
  return out;
}

double dirichlet_energy(const Lattice& lat,
                        const std::function<double(int32_t)>& edge_len) {
  double e = 0.0;
  for (int32_t i = 0; i < lat.num_edges(); ++i) {
    double l = edge_len(i);
    e += l * l;
  }
  return 0.5 * e;
}

void dump_lattice(const Lattice& lat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io, "cannot open output file: " + path);
  for (const auto& nd : lat.nodes) out << "v " << nd[0] << ' ' << nd[1] << ' ' << nd[2] << '\n';
  for (const auto& e : lat.edges) out << "e " << e[0] << ' ' << e[1] << '\n';
  if (!out) throw error(errc::io, "write failed: " + path);
}

}  // namespace latmap
