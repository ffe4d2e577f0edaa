#include "latmap/hyp_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "latmap/errors.hpp"
#include "latmap/optim.hpp"

namespace latmap {

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    }
  return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

double frobenius_distance(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) {
    double d = a.m[i] - b.m[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double lorentz_dot(const Vec3& p, const Vec3& q) { return p.z * q.z - p.x * q.x - p.y * q.y; }

Mat3 lorentz_inverse(const Mat3& a) {
  // J A^T J with J = diag(-1,-1,+1): transpose, then flip the mixed
  // space/time entries.
  Mat3 r = transpose(a);
  r(0, 2) = -r(0, 2);
  r(1, 2) = -r(1, 2);
  r(2, 0) = -r(2, 0);
  r(2, 1) = -r(2, 1);
  return r;
}

double isometry_defect(const Mat3& a) {
  Mat3 atja;  // A^T J A
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      atja(i, j) = a(2, i) * a(2, j) - a(0, i) * a(0, j) - a(1, i) * a(1, j);
    }
  Mat3 jmat;
  jmat(0, 0) = -1.0;
  jmat(1, 1) = -1.0;
  double defect = frobenius_distance(atja, jmat);
  double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
               a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
               a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  defect = std::max(defect, std::abs(det - 1.0));
  if (a(2, 2) <= 0.0) defect = std::max(defect, 1.0);  // past-pointing
  return defect;
}

Vec3 hyperboloid_project(const Vec3& v) {
  double s = lorentz_dot(v, v);
  if (s <= 0.0 || v.z <= 0.0)
    throw error(errc::degenerate, "cannot project a non-timelike or past-pointing vector onto the hyperboloid");
  return v / std::sqrt(s);
}

double hyp_distance(const Vec3& p, const Vec3& q) {
  // Equal to acosh(<p,q>_L), but evaluated from coordinate differences:
  // <p-q, p-q>_L = 2 - 2 cosh d = -4 sinh^2(d/2).  The acosh form loses half
  // the mantissa for nearby points far from the apex (entries ~cosh r, the
  // dot cancels to 1 + d^2/2), which puts a floor of ~3e-7 on measurable
  // distances at r ~ 4; this form is exact down to the roundoff of the
  // coordinates themselves.
  double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
  double s2 = dx * dx + dy * dy - dz * dz;  // 4 sinh^2(d/2), >= 0 on the sheet
  return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, s2)));
}

Vec3 hyp_direction(const Vec3& p, const Vec3& q) {
  double c = std::max(1.0, lorentz_dot(p, q));
  double s = std::sqrt(c * c - 1.0);  // sinh of the distance
  if (s < 1e-15) throw error(errc::validation, "direction between coincident hyperbolic points is undefined");
  return (q - c * p) / s;
}

namespace {

// Columns (e1, e2, p): the Lorentz-orthonormal frame at p whose first axis
// points toward q.  F^T J F = J and det F = +1, so isometries transport one
// frame onto another as A = F2 * F1^{-1}.
Mat3 frame_at(const Vec3& p, const Vec3& q) {
  Vec3 e1 = hyp_direction(p, q);
  Vec3 c = cross(e1, p);
  Vec3 e2{-c.x, -c.y, c.z};  // J * (e1 x p)
  Mat3 f;
  f(0, 0) = e1.x; f(1, 0) = e1.y; f(2, 0) = e1.z;
  f(0, 1) = e2.x; f(1, 1) = e2.y; f(2, 1) = e2.z;
  f(0, 2) = p.x;  f(1, 2) = p.y;  f(2, 2) = p.z;
  return f;
}

Mat3 mat_add(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] + b.m[i];
  return r;
}

Mat3 mat_scale(const Mat3& a, double s) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] * s;
  return r;
}

// Translation of length t along the oriented axis whose unit boost generator
// is k (k^3 = k): exp(t k) = I + sinh(t) k + (cosh(t) - 1) k^2.
Mat3 axis_translation(const Mat3& k, double t) {
  Mat3 r = Mat3::identity();
  r = mat_add(r, mat_scale(k, std::sinh(t)));
  r = mat_add(r, mat_scale(k * k, std::cosh(t) - 1.0));
  return r;
}

}  // namespace

Mat3 isometry_from_correspondence(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                  const Vec3& q2) {
  double d1 = hyp_distance(p1, q1);
  double d2 = hyp_distance(p2, q2);
  if (d1 < 1e-12 || std::abs(d1 - d2) > 1e-6 * std::max(1.0, d1))
    throw error(errc::validation, "marked segments must be nondegenerate and of equal length");
  return frame_at(p2, q2) * lorentz_inverse(frame_at(p1, q1));
}

Vec3 cosh_center(const std::vector<Vec3>& points) {
  if (points.empty()) throw error(errc::validation, "hyperbolic center of an empty set");
  Vec3 s{0, 0, 0};
  for (const Vec3& p : points) s += p;
  return hyperboloid_project(s);  // scale drops out, so the sum works as well as the mean
}

Mat3 FuchsianGroupSpec::relator() const {
  Mat3 r = Mat3::identity();
  for (size_t k = 0; k + 1 < gens.size(); k += 2) {
    const Mat3& a = gens[k];
    const Mat3& b = gens[k + 1];
    r = r * a * b * lorentz_inverse(a) * lorentz_inverse(b);
  }
  return r;
}

double FuchsianGroupSpec::relation_residual() const {
  return frobenius_distance(relator(), Mat3::identity());
}

FuchsianGroupSpec octagon_group() {
  // Regular octagon with vertex angle pi/4: circumradius rho has
  // cosh(rho) = cot^2(pi/8) = 3 + 2*sqrt(2).
  const double ch = 3.0 + 2.0 * std::sqrt(2.0);
  const double sh = std::sqrt(ch * ch - 1.0);
  std::array<Vec3, 8> v;
  for (int k = 0; k < 8; ++k) {
    double ang = k * (std::acos(-1.0) / 4.0);
    v[k] = {sh * std::cos(ang), sh * std::sin(ang), ch};
  }

  // Sides in boundary order carry the labels a b a^-1 b^-1 c d c^-1 d^-1.
  // The pairing p_x glues the two sides labeled x, matching traversal arrows,
  // so it carries (V_{s+1}, V_s) onto (V_t, V_{t+1}) where t/s are the first
  // vertices of the positively/negatively labeled side.  This identifies all
  // eight corners to a single point (angle sum 2*pi) and the pairings satisfy
  // the vertex relation p_a p_b p_a^-1 p_d^-1 p_c p_d p_c^-1 p_b^-1 = I.
  struct Pairing {
    int target, source;
  };
  const std::array<Pairing, 4> pairs = {{{0, 2}, {1, 3}, {4, 6}, {5, 7}}};
  std::array<Mat3, 4> p;
  for (int k = 0; k < 4; ++k) {
    const Vec3& t0 = v[pairs[k].target];
    const Vec3& t1 = v[(pairs[k].target + 1) % 8];
    const Vec3& s0 = v[pairs[k].source];
    const Vec3& s1 = v[(pairs[k].source + 1) % 8];
    p[k] = isometry_from_correspondence(s1, s0, t0, t1);
  }

  // Cyclically shifting the vertex relation turns it into the standard
  // commutator presentation: [p_b^-1, p_a] [p_d^-1, p_c] = I, so take
  //   a1 = p_b^-1, b1 = p_a, a2 = p_d^-1, b2 = p_c,
  // which trivially still generate the side-pairing group.
  FuchsianGroupSpec g;
  g.gens = {lorentz_inverse(p[1]), p[0], lorentz_inverse(p[3]), p[2]};
  if (g.relation_residual() > g.relation_tol)
    throw error(errc::config, "octagon side pairing does not satisfy the surface relation");
  return g;
}

Mat3 word_matrix(const FuchsianGroupSpec& group, const GenWord& word) {
  Mat3 m = Mat3::identity();
  for (int idx : word) {
    int k = std::abs(idx);
    if (k < 1 || k > static_cast<int>(group.gens.size()))
      throw error(errc::config, "cut word references generator " + std::to_string(k) +
                                    " but the group has " + std::to_string(group.gens.size()));
    m = m * (idx > 0 ? group.gens[k - 1] : lorentz_inverse(group.gens[k - 1]));
  }
  return m;
}

namespace {

void append_reduced(GenWord& w, int letter) {
  if (!w.empty() && w.back() == -letter)
    w.pop_back();
  else
    w.push_back(letter);
}

// Is w (cyclically reduced) a rotation of the surface relator or its inverse?
bool is_relator_rotation(const GenWord& w, int genus) {
  GenWord rel;
  for (int k = 0; k < genus; ++k) {
    rel.insert(rel.end(), {2 * k + 1, 2 * k + 2, -(2 * k + 1), -(2 * k + 2)});
  }
  size_t n = rel.size();
  if (w.size() != n) return false;
  GenWord relinv(n);
  for (size_t i = 0; i < n; ++i) relinv[i] = -rel[n - 1 - i];
  for (size_t r = 0; r < n; ++r) {
    bool eq = true, eqi = true;
    for (size_t i = 0; i < n && (eq || eqi); ++i) {
      eq = eq && w[i] == rel[(i + r) % n];
      eqi = eqi && w[i] == relinv[(i + r) % n];
    }
    if (eq || eqi) return true;
  }
  return false;
}

}  // namespace

EdgeTransforms edge_transformations(const Lattice& lat, const std::vector<HypMembrane>& cuts,
                                    const FuchsianGroupSpec& group) {
  std::vector<Mat3> w(cuts.size()), winv(cuts.size());
  for (size_t m = 0; m < cuts.size(); ++m) {
    w[m] = word_matrix(group, cuts[m].word);
    winv[m] = lorentz_inverse(w[m]);
  }

  EdgeTransforms et;
  et.alpha.assign(lat.edges.size(), Mat3::identity());
  et.nontrivial.assign(lat.edges.size(), 0);
  // generator letters crossed by each canonical edge, in crossing order
  std::vector<GenWord> letters(lat.edges.size());

  struct Hit {
    double t;
    int membrane;
    int sign;
  };
  std::vector<Hit> hits;
  for (size_t e = 0; e < lat.edges.size(); ++e) {
    const Vec3& p = lat.coords[lat.edges[e][0]];
    const Vec3& q = lat.coords[lat.edges[e][1]];
    hits.clear();
    for (size_t m = 0; m < cuts.size(); ++m) {
      Crossing cr = membrane_crossing(cuts[m].geom, p, q);
      if (cr.sign != 0) hits.push_back({cr.t, static_cast<int>(m), cr.sign});
    }
    if (hits.empty()) continue;
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return a.t != b.t ? a.t < b.t : a.membrane < b.membrane;
    });
    Mat3 acc = Mat3::identity();
    for (const Hit& h : hits) {
      acc = acc * (h.sign > 0 ? w[h.membrane] : winv[h.membrane]);
      const GenWord& mw = cuts[h.membrane].word;
      if (h.sign > 0)
        for (int L : mw) letters[e].push_back(L);
      else
        for (auto it = mw.rbegin(); it != mw.rend(); ++it) letters[e].push_back(-*it);
    }
    et.alpha[e] = acc;
    et.nontrivial[e] = 1;
  }

  // The deck transformations must form a cocycle: around every unit square
  // the directed product is the identity, otherwise some membrane boundary
  // slices through the square.  Checked on the crossed generator letters:
  // the ring word must reduce to nothing freely or via the surface relation
  // (exact); only exotic leftovers fall back to a numeric comparison.
  const int genus = static_cast<int>(group.gens.size()) / 2;
  for_each_unit_square(lat, [&](int32_t v00, int32_t v10, int32_t v11, int32_t v01) {
    const int32_t ring[5] = {v00, v10, v11, v01, v00};
    GenWord word;
    for (int s = 0; s < 4; ++s) {
      int32_t e = edge_between(lat, ring[s], ring[s + 1]);
      if (!et.nontrivial[e]) continue;
      if (lat.edges[e][0] == ring[s])
        for (int L : letters[e]) append_reduced(word, L);
      else
        for (auto it = letters[e].rbegin(); it != letters[e].rend(); ++it)
          append_reduced(word, -*it);
    }
    size_t lo = 0, hi = word.size();
    while (hi - lo >= 2 && word[lo] == -word[hi - 1]) {
      ++lo;  // cyclic reduction: conjugation does not affect triviality
      --hi;
    }
    if (lo == hi) return;
    GenWord core(word.begin() + lo, word.begin() + hi);
    if (is_relator_rotation(core, genus)) return;
    Mat3 prod = word_matrix(group, core);
    if (frobenius_distance(prod, Mat3::identity()) > 1e-9) {
      const auto& nd = lat.nodes[v00];
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "cut membranes intersect the lattice non-transversally at square (%d, %d, %d)",
                    nd[0], nd[1], nd[2]);
      throw error(errc::validation, buf);
    }
  });
  return et;
}

Mat3 loop_monodromy(const Lattice& lat, const EdgeTransforms& et,
                    const std::vector<int32_t>& loop) {
  Mat3 m = Mat3::identity();
  for (size_t s = 0; s + 1 < loop.size(); ++s) {
    int32_t e = edge_between(lat, loop[s], loop[s + 1]);
    if (e < 0)
      throw error(errc::validation, "monodromy loop vertices " + std::to_string(loop[s]) + " and " +
                                        std::to_string(loop[s + 1]) + " are not adjacent");
    if (et.nontrivial[e]) m = m * et.directed(e, lat.edges[e][0] == loop[s]);
  }
  return m;
}

HypField cosh_cm_step(const Lattice& lat, const EdgeTransforms& et, const HypField& f) {
  HypField out(f.size());
  for (int32_t v = 0; v < lat.num_vertices(); ++v) {
    Vec3 acc{0, 0, 0};
    for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
      int32_t j = lat.adj_vtx[t];
      int32_t e = lat.adj_edge[t];
      if (et.nontrivial[e])
        acc += et.directed(e, lat.edges[e][0] == v) * f[j];
      else
        acc += f[j];
    }
    // A sum of future-pointing unit timelike vectors stays timelike, so the
    // projection is always defined.
    out[v] = hyperboloid_project(acc);
  }
  return out;
}

namespace {

// Kahan-compensated accumulator.  The monotonicity of the cosh energy across
// sweeps is checked at ~1e-13 relative scale, which plain summation over ~1e5
// edges cannot deliver.
struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

HypEnergy cosh_energy(const Lattice& lat, const EdgeTransforms& et, const HypField& f) {
  Kahan cosh_acc, dir_acc;
  for (size_t e = 0; e < lat.edges.size(); ++e) {
    Vec3 q = et.nontrivial[e] ? et.alpha[e] * f[lat.edges[e][1]] : f[lat.edges[e][1]];
    const Vec3& p = f[lat.edges[e][0]];
    // Same difference form as hyp_distance: -<p-q,p-q>_L = 2(cosh l - 1),
    // so the cosh term needs no acosh/cosh round trip at all.
    double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    double s2 = std::max(0.0, dx * dx + dy * dy - dz * dz);
    cosh_acc.add(0.5 * s2);
    double l = 2.0 * std::asinh(0.5 * std::sqrt(s2));
    dir_acc.add(0.5 * l * l);
  }
  HypEnergy en;
  en.cosh_energy = cosh_acc.sum;
  en.dirichlet = dir_acc.sum;
  return en;
}

double hyp_balanced_residual(const Lattice& lat, const EdgeTransforms& et, const HypField& f) {
  // sum_j sinh(l_ij) e_ij = sum_j alpha_ij f(j) - (sum_j cosh l_ij) f(i),
  // evaluated without dividing by sinh so coincident neighbors are harmless.
  double worst = 0.0;
  for (int32_t v = 0; v < lat.num_vertices(); ++v) {
    Vec3 s{0, 0, 0};
    double csum = 0.0;
    for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
      int32_t j = lat.adj_vtx[t];
      int32_t e = lat.adj_edge[t];
      Vec3 q = et.nontrivial[e] ? et.directed(e, lat.edges[e][0] == v) * f[j] : f[j];
      s += q;
      csum += lorentz_dot(f[v], q);
    }
    Vec3 r = s - csum * f[v];
    worst = std::max(worst, std::sqrt(std::max(0.0, -lorentz_dot(r, r))));
  }
  return worst;
}

HypField harmonic_hyperbolic(const Lattice& lat, const EdgeTransforms& et,
                             const HypFlowOptions& opts, HypFlowStats* stats,
                             const HypField* warm_start) {
  if (opts.tol <= 0.0) throw error(errc::validation, "convergence tolerance must be positive");
  HypField f;
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != lat.num_vertices())
      throw error(errc::validation, "warm start field has the wrong number of vertices");
    f = *warm_start;
  } else {
    f.assign(lat.num_vertices(), Vec3{0, 0, 1});
  }

  HypFlowStats st;
  double energy = cosh_energy(lat, et, f).cosh_energy;
  st.energy_trace.push_back(energy);

  // The simultaneous step alone contracts like 1 - O(1/n^2), tens of
  // thousands of sweeps at useful resolutions, so the loop wraps it in
  // Chebyshev extrapolation: x_{k+1} = x_{k-1} + w_k (step(x_k) - x_{k-1})
  // (projected back to the sheet), with the classical weight schedule for a
  // contraction-factor estimate rho measured from plain warmup sweeps.  Fixed
  // points are unchanged.  An extrapolated sweep is accepted only if the cosh
  // energy did not rise; otherwise the plain step is taken and the schedule
  // restarts, so acceleration never costs the energy-monotonicity guarantee.
  constexpr int kWarmup = 30;        // plain sweeps between (re-)estimates of rho
  constexpr int kCheckInterval = 100;  // extrapolated sweeps per progress check
  HypField prev = f;  // x_{k-1}
  double rho = 0.0;   // engaged contraction estimate; 0 while in plain mode
  double rho_floor = 0.0;
  double omega = 0.0;  // 0 marks the first extrapolated sweep after engaging
  std::array<double, 10> recent_ratios{};
  int ratio_count = 0;
  double last_move = -1.0;
  double checkpoint_move = -1.0;
  int plain_count = 0, cheb_count = 0;

  while (st.sweeps < opts.max_sweeps) {
    HypField target = cosh_cm_step(lat, et, f);
    HypField next;
    double next_energy = 0.0;
    bool extrapolated = false;

    if (rho > 0.0) {
      double w = (omega == 0.0) ? 1.0 / (1.0 - 0.5 * rho * rho)
                                : 1.0 / (1.0 - 0.25 * rho * rho * omega);
      HypField cand(f.size());
      bool valid = true;
      for (size_t v = 0; v < f.size() && valid; ++v) {
        Vec3 y = prev[v] + w * (target[v] - prev[v]);
        double s = lorentz_dot(y, y);
        if (s <= 1e-12 || y.z <= 0.0)
          valid = false;  // overshot the light cone; this sweep stays plain
        else
          cand[v] = y / std::sqrt(s);
      }
      if (valid) {
        double ec = cosh_energy(lat, et, cand).cosh_energy;
        if (ec <= energy) {
          next = std::move(cand);
          next_energy = ec;
          omega = w;
          extrapolated = true;
        }
      }
      if (!extrapolated) {
        // The flow is still too nonlinear for this weight schedule: drop back
        // to plain sweeps and re-estimate, but never re-engage below the rho
        // that was already making progress.
        rho_floor = std::max(rho_floor, rho);
        rho = 0.0;
        omega = 0.0;
        plain_count = 0;
        cheb_count = 0;
        ratio_count = 0;
      }
    }
    if (!extrapolated) {
      next_energy = cosh_energy(lat, et, target).cosh_energy;
      next = std::move(target);
    }

    double move = 0.0;
    for (size_t v = 0; v < f.size(); ++v) move = std::max(move, hyp_distance(f[v], next[v]));
    prev = std::move(f);
    f = std::move(next);
    ++st.sweeps;

    double rise = next_energy - energy;
    if (rise > 0.0) {
      st.max_energy_increase = std::max(st.max_energy_increase, rise);
      if (rise > 1e-12 * std::max(1.0, energy)) st.energy_monotone = false;
    }
    energy = next_energy;
    st.energy_trace.push_back(energy);
    st.movement = move;
    if (move <= opts.tol) {
      st.converged = true;
      break;
    }

    if (rho == 0.0) {
      ++plain_count;
      if (last_move > 0.0 && move > 0.0) {
        recent_ratios[ratio_count % recent_ratios.size()] = std::min(move / last_move, 0.999999);
        ++ratio_count;
      }
      if (plain_count >= kWarmup && ratio_count > 0) {
        // Take the largest recent ratio (the slowest observed mode) and halve
        // the gap on top: overestimating rho only costs a little speed, while
        // underestimating it leaves the slowest modes outside the damped
        // interval entirely.
        double r = 0.0;
        size_t have = std::min<size_t>(ratio_count, recent_ratios.size());
        for (size_t i = 0; i < have; ++i) r = std::max(r, recent_ratios[i]);
        rho = std::min(0.99999999, std::max(rho_floor, 1.0 - 0.5 * (1.0 - r)));
        omega = 0.0;
        cheb_count = 0;
        checkpoint_move = move;
      }
    } else {
      ++cheb_count;
      if (cheb_count % kCheckInterval == 0) {
        // Compare measured progress against what the engaged rho predicts; if
        // we achieved less than half the predicted decades, the true
        // contraction is closer to 1, so halve the gap and restart the weight
        // schedule in place.
        double srt = std::sqrt(1.0 - rho * rho);
        double predicted = std::pow((1.0 - srt) / (1.0 + srt), kCheckInterval);
        if (checkpoint_move > 0.0 && move > checkpoint_move * std::sqrt(predicted)) {
          rho = std::min(0.99999999, 1.0 - 0.5 * (1.0 - rho));
          omega = 0.0;
        }
        checkpoint_move = move;
      }
    }
    last_move = move;
  }
  if (stats) *stats = std::move(st);
  return f;
}

HypFamily fn_twist_family(const FuchsianGroupSpec& base) {
  if (base.gens.size() < 4)
    throw error(errc::config, "twist family needs a genus-2 generator set");
  // The twist axis is the invariant geodesic of c = [a2, b2] (equal to
  // [b1, a1] by the surface relation); translations along it commute with c,
  // so conjugating only (a2, b2) preserves the relation for every t.
  const Mat3 a2 = base.gens[2], b2 = base.gens[3];
  Mat3 c = a2 * b2 * lorentz_inverse(a2) * lorentz_inverse(b2);
  double tr = c(0, 0) + c(1, 1) + c(2, 2);
  double chl = (tr - 1.0) / 2.0;
  if (chl <= 1.0 + 1e-12)
    throw error(errc::config, "handle commutator is not a hyperbolic translation");
  double shl = std::sqrt(chl * chl - 1.0);
  Mat3 k = mat_scale(mat_add(c, mat_scale(lorentz_inverse(c), -1.0)), 1.0 / (2.0 * shl));

  HypFamily fam;
  fam.dim = 1;
  fam.make = [base, k](const std::vector<double>& params) {
    Mat3 g = axis_translation(k, params.at(0));
    Mat3 ginv = lorentz_inverse(g);
    FuchsianGroupSpec spec = base;
    spec.gens[2] = g * spec.gens[2] * ginv;
    spec.gens[3] = g * spec.gens[3] * ginv;
    return spec;
  };
  return fam;
}

HypFamily conjugation_family(const FuchsianGroupSpec& base) {
  HypFamily fam;
  fam.dim = 1;
  fam.make = [base](const std::vector<double>& params) {
    double t = params.at(0);
    Mat3 g;  // translation along the x-axis geodesic
    g(0, 0) = std::cosh(t);
    g(0, 2) = std::sinh(t);
    g(2, 0) = std::sinh(t);
    g(2, 2) = std::cosh(t);
    Mat3 ginv = lorentz_inverse(g);
    FuchsianGroupSpec spec = base;
    for (Mat3& gen : spec.gens) gen = g * gen * ginv;
    return spec;
  };
  return fam;
}

namespace {

std::vector<Vec3> hyp_point_map(const Lattice& lat, const EdgeTransforms& et,
                                const HypField& f, const std::vector<Vec3>& points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) {
    auto base = locate_cell(lat, p);
    if (!base)
      throw error(errc::validation, "cloud point lies in an incomplete lattice cell; increase epsilon");
    auto cell = lat.cell((*base)[0], (*base)[1], (*base)[2]);
    double u[3];
    for (int a = 0; a < 3; ++a) {
      u[a] = std::clamp(p[a] / lat.h - (*base)[a], 0.0, 1.0);
    }
    // Bring each corner value into the base corner's chart by composing the
    // deck transformations along the in-cell x, then y, then z edge path.
    Vec3 acc{0, 0, 0};
    for (int idx = 0; idx < 8; ++idx) {
      int d[3] = {idx & 1, (idx >> 1) & 1, (idx >> 2) & 1};
      Mat3 transport = Mat3::identity();
      bool trivial = true;
      int32_t cur = (*cell)[0];
      int step[3] = {0, 0, 0};
      for (int a = 0; a < 3; ++a) {
        if (!d[a]) continue;
        step[a] = 1;
        int32_t nxt = (*cell)[step[0] + 2 * step[1] + 4 * step[2]];
        int32_t e = edge_between(lat, cur, nxt);
        if (et.nontrivial[e]) {
          transport = transport * et.directed(e, lat.edges[e][0] == cur);
          trivial = false;
        }
        cur = nxt;
      }
      Vec3 val = trivial ? f[cur] : transport * f[cur];
      double wgt = (d[0] ? u[0] : 1.0 - u[0]) * (d[1] ? u[1] : 1.0 - u[1]) *
                   (d[2] ? u[2] : 1.0 - u[2]);
      acc += wgt * val;
    }
    out.push_back(hyperboloid_project(acc));
  }
  return out;
}

}  // namespace

HypResult harmonic_hyperbolic_pipeline(const PointCloud& cloud, const LatticeParams& params,
                                       const std::vector<HypMembrane>& cuts,
                                       const FuchsianGroupSpec& group,
                                       const HypFlowOptions& opts) {
  HypResult res;
  res.lattice = build_lattice(cloud, params);
  res.group = group;
  EdgeTransforms et = edge_transformations(res.lattice, cuts, group);
  res.field = harmonic_hyperbolic(res.lattice, et, opts, &res.stats);
  res.energy = cosh_energy(res.lattice, et, res.field);
  res.normalized_energy =
      res.energy.dirichlet / (4.0 * std::acos(-1.0) * (group.genus - 1));
  res.balanced = hyp_balanced_residual(res.lattice, et, res.field);
  res.relation_residual = group.relation_residual();
  res.point_map = hyp_point_map(res.lattice, et, res.field, cloud.points);
  return res;
}

HypResult conformal_hyperbolic(const PointCloud& cloud, const LatticeParams& params,
                               const std::vector<HypMembrane>& cuts, const HypFamily& family,
                               const HypSearchOptions& opts) {
  HypResult res;
  res.lattice = build_lattice(cloud, params);

  struct Best {
    bool valid = false;
    double energy = std::numeric_limits<double>::infinity();
    std::vector<double> params;
    FuchsianGroupSpec group;
    EdgeTransforms et;
    HypField field;
    HypFlowStats stats;
  } best;
  HypField warm;
  int evals = 0;

  auto evaluate = [&](const std::vector<double>& x) {
    ++evals;
    FuchsianGroupSpec group = family.make(x);
    if (group.relation_residual() > group.relation_tol)
      return 1e30;  // outside the family's valid range; steer the search away
    EdgeTransforms et = edge_transformations(res.lattice, cuts, group);
    HypFlowStats stats;
    HypField f = harmonic_hyperbolic(res.lattice, et, opts.flow, &stats,
                                     warm.empty() ? nullptr : &warm);
    warm = f;
    double energy = cosh_energy(res.lattice, et, f).dirichlet;
    if (energy < best.energy) {
      best = {true, energy, x, std::move(group), std::move(et), std::move(f), std::move(stats)};
    }
    return energy;
  };

  if (family.dim == 0) {
    evaluate({});
  } else {
    NelderMeadOptions nm;
    nm.max_evals = opts.max_evals;
    nm.initial_step = opts.initial_step;
    nm.x_tol = opts.param_tol;
    nelder_mead(evaluate, std::vector<double>(family.dim, 0.0), nm);
  }
  if (!best.valid)
    throw error(errc::config, "no family member satisfied the group relation");

  res.group = best.group;
  res.best_params = best.params;
  res.field = best.field;
  res.stats = best.stats;
  res.energy = cosh_energy(res.lattice, best.et, res.field);
  res.normalized_energy =
      res.energy.dirichlet / (4.0 * std::acos(-1.0) * (res.group.genus - 1));
  res.balanced = hyp_balanced_residual(res.lattice, best.et, res.field);
  res.relation_residual = res.group.relation_residual();
  res.search_evaluations = evals;
  res.point_map = hyp_point_map(res.lattice, best.et, res.field, cloud.points);
  return res;
}

std::array<double, 2> disk_coords(const Vec3& p) {
  return {p.x / (1.0 + p.z), p.y / (1.0 + p.z)};
}

std::vector<HypMembrane> genus2_dumbbell_cuts() {
  // Cut system for the dumbbell surface: handles centered at x = -c (loops
  // a1, b1) and x = +c (a2, b2), joined by a rod.  Words are chosen so the
  // directed product around every lattice square away from the membrane
  // boundaries is the identity; boundaries are buried inside the solid.
  const double c = 1.6, r_disk = 1.0;
  const double inf = std::numeric_limits<double>::infinity();
  const Vec3 xp{1, 0, 0}, xm{-1, 0, 0}, yp{0, 1, 0}, ym{0, -1, 0}, zm{0, 0, -1};
  const Vec3 c1{-c, 0, 0}, c2{c, 0, 0};

  std::vector<HypMembrane> cuts;
  auto plane_y = [&](std::vector<HalfSpace> sides, GenWord word) {
    cuts.push_back({MembraneGeometry{yp, 0.0, std::move(sides), {}}, std::move(word)});
  };
  auto plane_z = [&](std::vector<HalfSpace> sides, std::vector<RadialBound> radial,
                     GenWord word) {
    cuts.push_back({MembraneGeometry{Vec3{0, 0, 1}, 0.0, std::move(sides), std::move(radial)},
                    std::move(word)});
  };

  plane_y({{xm, c, false}}, {1});                                    // y = 0, x <= -c
  plane_y({{xp, c, false}}, {4});                                    // y = 0, x >= +c
  plane_y({{xp, -c, true}, {xm, -c, true}, {zm, 0.0, true}},         // y = 0 under the rod
          {1, 2, -1, -2});
  plane_z({{yp, 0.0, false}}, {{c1, 0.0, r_disk, false, false}}, {2});       // left disk, y >= 0
  plane_z({{ym, 0.0, true}}, {{c1, 0.0, r_disk, false, false}}, {1, 2, -1}); // left disk, y < 0
  plane_z({{yp, 0.0, false}}, {{c2, 0.0, r_disk, false, false}}, {3});       // right disk, y >= 0
  plane_z({{ym, 0.0, true}}, {{c2, 0.0, r_disk, false, false}}, {4, 3, -4}); // right disk, y < 0
  plane_z({{yp, 0.0, false}},                                                 // outer plane, y >= 0
          {{c1, r_disk, inf, true, false}, {c2, r_disk, inf, true, false}}, {-1, 4});
  plane_z({{ym, 0.0, true}},                                                  // outer plane, y < 0
          {{c1, r_disk, inf, true, false}, {c2, r_disk, inf, true, false}}, {4, -1});
  return cuts;
}

std::vector<HypMembrane> transform_cuts(std::vector<HypMembrane> cuts,
                                        const CloudTransform& tf) {
  for (HypMembrane& m : cuts) m.geom = transform_membrane(m.geom, tf);
  return cuts;
}

}  // namespace latmap
