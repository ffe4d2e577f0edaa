#pragma once

// Small shared fixtures for the unit tests.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "latmap/lattice.hpp"
#include "latmap/pointcloud.hpp"

namespace testutil {

using latmap::Lattice;
using latmap::PointCloud;
using latmap::Vec3;

// Lattice whose vertex set is exactly the given grid nodes: place one cloud
// point on each node and keep epsilon below the grid spacing (0.9/n), so no
// other node is within reach.  Gives full control over the graph in tests.
inline Lattice exact_lattice(const std::vector<std::array<int, 3>>& nodes, int n = 20) {
  PointCloud cloud;
  for (const auto& nd : nodes)
    cloud.points.push_back({nd[0] / double(n), nd[1] / double(n), nd[2] / double(n)});
  return latmap::build_lattice(cloud, {0.9 / n, n});
}

// Path graph of m collinear vertices along the x axis.
inline Lattice path_lattice(int m, int n = 20) {
  std::vector<std::array<int, 3>> nodes;
  for (int i = 0; i < m; ++i) nodes.push_back({i, 0, 0});
  return exact_lattice(nodes, n);
}

// Full (nx+1) x (ny+1) x (nz+1) grid box.
inline Lattice box_lattice(int nx, int ny, int nz, int n = 20) {
  std::vector<std::array<int, 3>> nodes;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k) nodes.push_back({i, j, k});
  return exact_lattice(nodes, n);
}

// 7-vertex axis star: origin plus its six grid neighbors.
inline Lattice star_lattice() {
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0});
  return latmap::build_lattice(cloud, {0.12, 10});
}

class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path_.c_str()); }

  const std::string& path() const { return path_; }

  void write(const std::string& contents) const {
    std::ofstream out(path_);
    out << contents;
  }

 private:
  std::string path_;
};

inline std::mt19937_64 test_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace testutil
