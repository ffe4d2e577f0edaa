#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "latmap/pointcloud.hpp"
#include "latmap/vec3.hpp"

namespace latmap {

struct LatticeParams {
  double epsilon = 0.0;  // neighborhood radius; default 2.5/n when <= 0
  int n = 32;            // grid resolution, spacing h = 1/n
};

// Cubic grid restricted to the epsilon-neighborhood of a point cloud.
// Vertices are grid nodes strictly within epsilon of some cloud point;
// edges join axis-neighbors at distance h.  The graph must be connected.
struct Lattice {
  double h = 0.0;
  int n = 0;
  double epsilon = 0.0;

  std::vector<std::array<int, 3>> nodes;  // integer grid coords, lex-sorted
  std::vector<Vec3> coords;               // nodes * h
  std::vector<std::array<int32_t, 2>> edges;  // a < b

  // CSR adjacency: neighbors of v are adj_vtx[adj_off[v] .. adj_off[v+1])
  // and adj_edge gives the index of the connecting edge.
  std::vector<int32_t> adj_off;
  std::vector<int32_t> adj_vtx;
  std::vector<int32_t> adj_edge;

  std::unordered_map<uint64_t, int32_t> index;  // packed grid coord -> vertex

  std::vector<double> cloud_dist;  // per-vertex distance to nearest cloud point
  double min_cloud_dist = 0.0;
  double max_cloud_dist = 0.0;

  int num_vertices() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  static uint64_t key(int i, int j, int k) {
    constexpr uint64_t off = uint64_t(1) << 20;
    return ((uint64_t(i) + off) << 42) | ((uint64_t(j) + off) << 21) | (uint64_t(k) + off);
  }

  int32_t find(int i, int j, int k) const {
    auto it = index.find(key(i, j, k));
    return it == index.end() ? -1 : it->second;
  }

  // Vertex indices of the unit cell with base corner (i,j,k), ordered
  // idx = dx + 2*dy + 4*dz; nullopt if any corner is missing.
  std::optional<std::array<int32_t, 8>> cell(int i, int j, int k) const;
};

// Scalar or vector field sampled on lattice vertices, component-major.
struct VertexField {
  int comps = 1;
  std::vector<double> data;  // comps * num_vertices, data[c*V + v]

  double& at(int c, int v) { return data[static_cast<size_t>(c) * vcount() + v]; }
  double at(int c, int v) const { return data[static_cast<size_t>(c) * vcount() + v]; }
  size_t vcount() const { return data.size() / static_cast<size_t>(comps); }
};

Lattice build_lattice(const PointCloud& cloud, const LatticeParams& params);

// For each boundary label k=1..4, the lattice vertices at the corners of the
// grid cells containing the points labeled k.
std::array<std::vector<int32_t>, 4> boundary_vertex_sets(const Lattice& lat,
                                                         const PointCloud& cloud);

// Base corner (i,j,k) of a fully occupied cell containing p; for points on a
// grid plane the lower cell is tried as a fallback.  nullopt if no such cell.
std::optional<std::array<int, 3>> locate_cell(const Lattice& lat, const Vec3& p);

// Index of the edge joining a and b, or -1.
int32_t edge_between(const Lattice& lat, int32_t a, int32_t b);

// Visits every unit lattice square as (v00, v10, v11, v01), the cycle order.
template <class F>
void for_each_unit_square(const Lattice& lat, F&& fn) {
  static constexpr int axes[3][2] = {{0, 1}, {1, 2}, {0, 2}};
  for (int32_t v = 0; v < lat.num_vertices(); ++v) {
    const auto& nd = lat.nodes[v];
    for (const auto& ax : axes) {
      int da[3] = {0, 0, 0}, db[3] = {0, 0, 0};
      da[ax[0]] = 1;
      db[ax[1]] = 1;
      int32_t v10 = lat.find(nd[0] + da[0], nd[1] + da[1], nd[2] + da[2]);
      int32_t v01 = lat.find(nd[0] + db[0], nd[1] + db[1], nd[2] + db[2]);
      if (v10 < 0 || v01 < 0) continue;
      int32_t v11 = lat.find(nd[0] + da[0] + db[0], nd[1] + da[1] + db[1],
                             nd[2] + da[2] + db[2]);
      if (v11 < 0) continue;
      fn(v, v10, v11, v01);
    }
  }
}

// Trilinear interpolation of a vertex field at an arbitrary point; the point
// must lie in a cell whose eight corners are all lattice vertices.
std::vector<double> trilinear_interpolate(const Lattice& lat, const VertexField& field,
                                          const Vec3& p);

// Half the sum of squared edge lengths, where len(e) is supplied per edge.
double dirichlet_energy(const Lattice& lat,
                        const std::function<double(int32_t)>& edge_len);

// Writes "v i j k" per vertex and "e a b" per edge.
void dump_lattice(const Lattice& lat, const std::string& path);

}  // namespace latmap
