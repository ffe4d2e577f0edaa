#pragma once

#include <string>
#include <vector>

#include "latmap/vec3.hpp"

namespace latmap {

// A point sample of a surface.  Labels are optional boundary-arc markers:
// either every point carries a label in {0,..,4} (0 = interior) or none do.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> labels;  // empty, or one entry per point

  bool has_labels() const { return !labels.empty(); }
};

// Affine change of coordinates q = (p + T) * S applied during normalization.
// Kept so results can be reported in the original frame.
struct CloudTransform {
  Vec3 T;
  double S = 1.0;

  Vec3 to_normalized(const Vec3& p) const { return (p + T) * S; }
  Vec3 to_input(const Vec3& q) const { return q / S - T; }
};

// Reads "x y z" or "x y z label" rows, one point per line.  Blank lines and
// lines starting with '#' are skipped.  Mixing labeled and unlabeled rows, a
// label outside {0,..,4}, or a malformed row is a parse error; an empty file
// is too.  If any nonzero labels appear, all four of 1,2,3,4 must be present.
PointCloud load_point_cloud(const std::string& path);

// Translates the centroid to the origin and scales so the largest coordinate
// magnitude becomes 1.  Errors if all points coincide.
CloudTransform normalize_cloud(PointCloud& cloud);

}  // namespace latmap
