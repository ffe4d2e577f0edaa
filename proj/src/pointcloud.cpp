#include "latmap/pointcloud.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "latmap/errors.hpp"

namespace latmap {

PointCloud load_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open point cloud file: " + path);

  PointCloud cloud;
  std::string line;
  int lineno = 0;
  int n_labeled = 0;
  std::array<bool, 5> label_seen{};

  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream row(line);
    Vec3 p;
    if (!(row >> p.x >> p.y >> p.z))
      throw error(errc::parse, "malformed row at line " + std::to_string(lineno));
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw error(errc::parse, "non-finite coordinate at line " + std::to_string(lineno));

    int label = 0;
    bool labeled = false;
    if (row >> label) {
      labeled = true;
      if (label < 0 || label > 4)
        throw error(errc::parse, "label out of range 0..4 at line " + std::to_string(lineno));
    }
    std::string trailing;
    if (row >> trailing)
      throw error(errc::parse, "trailing tokens at line " + std::to_string(lineno));

    cloud.points.push_back(p);
    if (labeled) {
      ++n_labeled;
      label_seen[label] = true;
      cloud.labels.push_back(label);
    }
  }

  if (cloud.points.empty()) throw error(errc::parse, "point cloud file is empty: " + path);
  if (n_labeled != 0 && n_labeled != static_cast<int>(cloud.points.size()))
    throw error(errc::parse, "labels must appear on every row or on none");

  bool any_nonzero = label_seen[1] || label_seen[2] || label_seen[3] || label_seen[4];
  if (any_nonzero && !(label_seen[1] && label_seen[2] && label_seen[3] && label_seen[4]))
    throw error(errc::validation, "boundary labels must include all of 1,2,3,4");

  return cloud;
}

CloudTransform normalize_cloud(PointCloud& cloud) {
  const auto& pts = cloud.points;
  Vec3 centroid;
  for (const auto& p : pts) centroid += p;
  centroid *= 1.0 / static_cast<double>(pts.size());

  double max_abs = 0.0;
  for (const auto& p : pts) {
    Vec3 q = p - centroid;
    max_abs = std::max({max_abs, std::fabs(q.x), std::fabs(q.y), std::fabs(q.z)});
  }
  if (max_abs == 0.0)
    throw error(errc::degenerate, "all points coincide; cannot normalize");

  CloudTransform tf;
  tf.T = -centroid;
  tf.S = 1.0 / max_abs;
  for (auto& p : cloud.points) p = tf.to_normalized(p);
  return tf;
}

}  // namespace latmap
