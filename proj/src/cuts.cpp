#include "latmap/cuts.hpp"

#include <cmath>

namespace latmap {

bool membrane_contains(const MembraneGeometry& m, const Vec3& p) {
  for (const auto& hs : m.sides) {
    double s = dot(hs.normal, p) - hs.offset;
    if (hs.strict ? (s <= 0.0) : (s < 0.0)) return false;
  }
  if (!m.radial.empty()) {
    Vec3 n = normalized(m.normal);
    for (const auto& rb : m.radial) {
      Vec3 d = p - rb.center;
      d -= dot(d, n) * n;  // in-plane distance
      double rho = norm(d);
      if (rb.lo_strict ? (rho <= rb.r_lo) : (rho < rb.r_lo)) return false;
      if (rb.hi_strict ? (rho >= rb.r_hi) : (rho > rb.r_hi)) return false;
    }
  }
  return true;
}

Crossing membrane_crossing(const MembraneGeometry& m, const Vec3& p, const Vec3& q) {
  double sp = dot(m.normal, p) - m.offset;
  double sq = dot(m.normal, q) - m.offset;
  // Points exactly on the plane count as the positive side, so membership is
  // deterministic for lattice nodes lying on grid-aligned membranes.
  int sgn_p = sp >= 0.0 ? 1 : -1;
  int sgn_q = sq >= 0.0 ? 1 : -1;
  if (sgn_p == sgn_q) return {};
  Crossing c;
  c.t = sp / (sp - sq);
  Vec3 at = p + c.t * (q - p);
  if (!membrane_contains(m, at)) return {};
  c.sign = (sgn_q - sgn_p) / 2;
  return c;
}

MembraneGeometry transform_membrane(const MembraneGeometry& m, const CloudTransform& tf) {
  MembraneGeometry out = m;
  out.offset = tf.S * (m.offset + dot(m.normal, tf.T));
  for (auto& hs : out.sides) hs.offset = tf.S * (hs.offset + dot(hs.normal, tf.T));
  for (auto& rb : out.radial) {
    rb.center = tf.to_normalized(rb.center);
    rb.r_lo *= tf.S;
    rb.r_hi *= tf.S;  // infinity stays infinity
  }
  return out;
}

}  // namespace latmap
