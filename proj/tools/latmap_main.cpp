// Command-line front end: wires cloud ingestion, lattice construction, the
// four solver pipelines, and report emission.  Every run writes the mapped
// coordinates ("u v" or "x y z" per input point) plus an optional JSON report
// whose scalars are bit-reproducible for identical inputs and seeds.

#include <chrono>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "latmap/errors.hpp"
#include "latmap/hyp_map.hpp"
#include "latmap/lattice.hpp"
#include "latmap/linsolve.hpp"
#include "latmap/pointcloud.hpp"
#include "latmap/rect_map.hpp"
#include "latmap/sphere_map.hpp"
#include "latmap/surface_gen.hpp"
#include "latmap/torus_map.hpp"

using nlohmann::json;
using namespace latmap;

namespace {

int exit_code(errc c) {
  switch (c) {
    case errc::io:
    case errc::parse:
      return 3;
    case errc::validation:
    case errc::degenerate:
    case errc::disconnected:
      return 4;
    case errc::solver:
      return 5;
    case errc::config:
      return 6;
  }
  return 1;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json transform_json(const CloudTransform& tf) {
  return {{"T", vec3_json(tf.T)}, {"S", tf.S}};
}

json lattice_json(const Lattice& lat) {
  return {{"vertices", lat.num_vertices()}, {"edges", lat.num_edges()},
          {"n", lat.n},                     {"epsilon", lat.epsilon},
          {"h", lat.h},                     {"min_cloud_dist", lat.min_cloud_dist},
          {"max_cloud_dist", lat.max_cloud_dist}};
}

json solve_json(const SolveStats& s) {
  return {{"iterations", s.iterations}, {"rel_residual", s.rel_residual},
          {"converged", s.converged}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::io, "cannot write output file " + path);
  out << std::setprecision(17);
  return out;
}

void write_report(const std::string& path, const json& report) {
  if (path.empty()) return;
  std::ofstream out = open_out(path);
  out << report.dump(2) << '\n';
}

void write_uv(const std::string& path, const std::vector<std::array<double, 2>>& rows) {
  std::ofstream out = open_out(path);
  for (const auto& r : rows) out << r[0] << ' ' << r[1] << '\n';
}

void write_xyz(const std::string& path, const std::vector<Vec3>& rows) {
  std::ofstream out = open_out(path);
  for (const auto& p : rows) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

void write_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream out = open_out(path);
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << p.x << ' ' << p.y << ' ' << p.z;
    if (cloud.has_labels()) out << ' ' << cloud.labels[i];
    out << '\n';
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw error(errc::parse, path + ": " + e.what());
  }
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw error(errc::parse, "expected a 3-vector");
  return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// ---- torus cuts -----------------------------------------------------------

// Membrane schema: {"type": "half-plane"|"annulus", "normal": [3], "offset": x,
// plus "side"/"side_offset" (half-plane) or "center"/"r_min"/"r_max" (annulus)}.
MembraneGeometry parse_torus_membrane(const json& j) {
  MembraneGeometry m;
  std::string type = j.at("type").get<std::string>();
  m.normal = vec3_from(j.at("normal"));
  m.offset = j.at("offset").get<double>();
  if (type == "half-plane") {
    HalfSpace hs;
    hs.normal = vec3_from(j.at("side"));
    hs.offset = j.value("side_offset", 0.0);
    hs.strict = j.value("side_strict", false);
    m.sides.push_back(hs);
  } else if (type == "annulus") {
    RadialBound rb;
    rb.center = vec3_from(j.at("center"));
    rb.r_lo = j.value("r_min", 0.0);
    rb.lo_strict = j.value("r_min_strict", false);
    if (j.contains("r_max")) rb.r_hi = j.at("r_max").get<double>();
    rb.hi_strict = j.value("r_max_strict", false);
    m.radial.push_back(rb);
  } else {
    throw error(errc::parse, "membrane type must be \"half-plane\" or \"annulus\", got \"" + type + "\"");
  }
  return m;
}

std::array<MembraneGeometry, 2> load_torus_cuts(const std::string& path) {
  json j = load_json(path);
  if (!j.is_array() || j.size() != 2)
    throw error(errc::parse, path + ": torus cuts must be a list of exactly two membranes");
  return {parse_torus_membrane(j[0]), parse_torus_membrane(j[1])};
}

// ---- hyperbolic cuts / groups ---------------------------------------------

// Generator tokens are "a1", "b1", ..., optionally suffixed "^-1".
int parse_gen_token(const std::string& tok) {
  std::string base = tok;
  int sign = 1;
  if (base.size() > 3 && base.substr(base.size() - 3) == "^-1") {
    sign = -1;
    base = base.substr(0, base.size() - 3);
  }
  if (base.size() < 2 || (base[0] != 'a' && base[0] != 'b'))
    throw error(errc::parse, "bad generator token \"" + tok + "\"");
  int k = 0;
  for (size_t i = 1; i < base.size(); ++i) {
    if (base[i] < '0' || base[i] > '9')
      throw error(errc::parse, "bad generator token \"" + tok + "\"");
    k = k * 10 + (base[i] - '0');
  }
  if (k < 1) throw error(errc::parse, "bad generator token \"" + tok + "\"");
  return sign * (2 * (k - 1) + (base[0] == 'a' ? 1 : 2));
}

std::string gen_token(int g) {
  int a = std::abs(g);
  int k = (a + 1) / 2;
  std::string s = (a % 2 == 1 ? "a" : "b") + std::to_string(k);
  if (g < 0) s += "^-1";
  return s;
}

json membrane_geometry_json(const MembraneGeometry& m) {
  json j{{"normal", vec3_json(m.normal)}, {"offset", m.offset}};
  if (!m.sides.empty()) {
    json sides = json::array();
    for (const auto& hs : m.sides)
      sides.push_back({{"normal", vec3_json(hs.normal)}, {"offset", hs.offset}, {"strict", hs.strict}});
    j["sides"] = sides;
  }
  if (!m.radial.empty()) {
    json radial = json::array();
    for (const auto& rb : m.radial) {
      json r{{"center", vec3_json(rb.center)}, {"r_lo", rb.r_lo},
             {"lo_strict", rb.lo_strict},      {"hi_strict", rb.hi_strict}};
      if (std::isfinite(rb.r_hi)) r["r_hi"] = rb.r_hi;
      radial.push_back(r);
    }
    j["radial"] = radial;
  }
  return j;
}

MembraneGeometry parse_membrane_geometry(const json& j) {
  MembraneGeometry m;
  m.normal = vec3_from(j.at("normal"));
  m.offset = j.at("offset").get<double>();
  for (const auto& s : j.value("sides", json::array())) {
    HalfSpace hs;
    hs.normal = vec3_from(s.at("normal"));
    hs.offset = s.value("offset", 0.0);
    hs.strict = s.value("strict", false);
    m.sides.push_back(hs);
  }
  for (const auto& r : j.value("radial", json::array())) {
    RadialBound rb;
    rb.center = vec3_from(r.at("center"));
    rb.r_lo = r.value("r_lo", 0.0);
    if (r.contains("r_hi")) rb.r_hi = r.at("r_hi").get<double>();
    rb.lo_strict = r.value("lo_strict", false);
    rb.hi_strict = r.value("hi_strict", false);
    m.radial.push_back(rb);
  }
  return m;
}

std::vector<HypMembrane> load_hyp_cuts(const std::string& path) {
  json j = load_json(path);
  if (!j.is_array() || j.empty())
    throw error(errc::parse, path + ": hyperbolic cuts must be a nonempty membrane list");
  std::vector<HypMembrane> cuts;
  for (const auto& mj : j) {
    HypMembrane m;
    for (const auto& tok : mj.at("word")) m.word.push_back(parse_gen_token(tok.get<std::string>()));
    m.geom = parse_membrane_geometry(mj);
    cuts.push_back(std::move(m));
  }
  return cuts;
}

json hyp_cuts_json(const std::vector<HypMembrane>& cuts) {
  json j = json::array();
  for (const auto& m : cuts) {
    json mj = membrane_geometry_json(m.geom);
    json word = json::array();
    for (int g : m.word) word.push_back(gen_token(g));
    mj["word"] = word;
    j.push_back(mj);
  }
  return j;
}

FuchsianGroupSpec load_group(const std::string& path) {
  json j = load_json(path);
  FuchsianGroupSpec g;
  g.genus = j.at("genus").get<int>();
  g.relation_tol = j.value("relation_tol", 1e-9);
  for (const auto& row : j.at("matrices")) {
    if (!row.is_array() || row.size() != 9)
      throw error(errc::parse, path + ": each generator must be 9 numbers, row-major");
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.m[i] = row[i].get<double>();
    g.gens.push_back(m);
  }
  if (static_cast<int>(g.gens.size()) != 2 * g.genus)
    throw error(errc::parse, path + ": expected 2*genus generator matrices");
  double res = g.relation_residual();
  if (res > g.relation_tol)
    throw error(errc::validation, path + ": generators violate the surface relation (residual " +
                                      std::to_string(res) + ")");
  return g;
}

json group_json(const FuchsianGroupSpec& g) {
  json mats = json::array();
  for (const auto& m : g.gens) {
    json row = json::array();
    for (double x : m.m) row.push_back(x);
    mats.push_back(row);
  }
  return {{"genus", g.genus}, {"matrices", mats}, {"relation_tol", g.relation_tol}};
}

// ---- shared pipeline plumbing ---------------------------------------------

struct CommonIo {
  std::string input, out, report;
  double epsilon = 0.0;
  int n = 32;
};

void add_common(CLI::App* c, CommonIo& io, bool needs_out = true) {
  c->add_option("--input", io.input, "input point cloud (xyz / labeled-xyz)")->required();
  if (needs_out) c->add_option("--out", io.out, "mapped coordinates output file")->required();
  c->add_option("--report", io.report, "JSON run report file");
  c->add_option("--epsilon", io.epsilon, "lattice neighborhood radius (default 2.5/n)");
  c->add_option("--n", io.n, "grid resolution, spacing 1/n");
}

struct Prepared {
  PointCloud cloud;
  CloudTransform tf;
  double load_s = 0.0;
};

Prepared prepare(const CommonIo& io) {
  Timer t;
  Prepared p;
  p.cloud = load_point_cloud(io.input);
  p.tf = normalize_cloud(p.cloud);
  p.load_s = t.seconds();
  return p;
}

json base_report(const char* command, const CommonIo& io, const Prepared& p,
                 const Lattice& lat, double total_s, double solve_s) {
  return {{"command", command},
          {"parameters", {{"input", io.input}, {"epsilon", io.epsilon}, {"n", io.n}}},
          {"transform", transform_json(p.tf)},
          {"lattice", lattice_json(lat)},
          {"timings", {{"load_s", p.load_s}, {"solve_s", solve_s}, {"total_s", total_s}}}};
}

// ---- subcommands -----------------------------------------------------------

struct SphereCmd {
  CommonIo io;
  double dt = 0.0, tol = 1e-6;
  int max_iters = 2000;
};

void run_sphere(const SphereCmd& o) {
  Timer total;
  Prepared p = prepare(o.io);
  FlowOptions fo;
  fo.dt = o.dt;
  fo.tol = o.tol;
  fo.max_iters = o.max_iters;
  Timer solve;
  SphereResult res = sphere_map_pipeline(p.cloud, {o.io.epsilon, o.io.n}, fo);
  double solve_s = solve.seconds();
  write_xyz(o.io.out, res.point_map);

  json report = base_report("sphere", o.io, p, res.lattice, total.seconds(), solve_s);
  report["parameters"].update({{"dt", o.dt}, {"tol", o.tol}, {"max_iters", o.max_iters}});
  report["flow"] = {{"iterations", res.stats.iterations},
                    {"converged", res.stats.converged},
                    {"final_residual", res.stats.final_residual},
                    {"initial_residual", res.initial_residual},
                    {"energy_trace_length", res.stats.energy_trace.size()},
                    {"final_energy", res.stats.energy_trace.back()}};
  write_report(o.io.report, report);
}

struct RectCmd {
  CommonIo io;
  double a = 0.0;  // harmonic only
  double tol = 1e-8;
  int max_iters = -1;
};

void run_rect(const RectCmd& o, bool conformal) {
  Timer total;
  Prepared p = prepare(o.io);
  SolveOptions so{o.tol, o.max_iters};
  Timer solve;
  json report;
  if (conformal) {
    RectResult res = conformal_rectangle(p.cloud, {o.io.epsilon, o.io.n}, so);
    double solve_s = solve.seconds();
    write_uv(o.io.out, res.point_uv);
    report = base_report("rect-conformal", o.io, p, res.lattice, total.seconds(), solve_s);
    report["a"] = res.param.a_bar;
    report["E1"] = res.param.E1;
    report["E2"] = res.param.E2;
    report["energy"] = res.energy;
    report["conformality_gap"] = res.conformality_gap;
    report["corner_vertices"] = res.corner_vertices;
    report["solver"] = {{"u1", solve_json(res.pair.stats1)}, {"u2", solve_json(res.pair.stats2)}};
  } else {
    if (o.a <= 0.0) throw error(errc::validation, "rectangle parameter a must be positive");
    Lattice lat = build_lattice(p.cloud, {o.io.epsilon, o.io.n});
    BoundarySets sets = boundary_vertex_sets(lat, p.cloud);
    UnitHarmonicPair pair = solve_unit_harmonic(lat, sets, so);
    double E1 = field_dirichlet_energy(lat, pair.u1);
    double E2 = field_dirichlet_energy(lat, pair.u2);
    RectangleMap rm = harmonic_rectangle(pair, o.a);
    VertexField vf;
    vf.comps = 2;
    vf.data.resize(2 * static_cast<size_t>(lat.num_vertices()));
    for (int32_t v = 0; v < lat.num_vertices(); ++v) {
      vf.at(0, v) = rm.uv[v][0];
      vf.at(1, v) = rm.uv[v][1];
    }
    std::vector<std::array<double, 2>> point_uv;
    point_uv.reserve(p.cloud.points.size());
    for (const Vec3& q : p.cloud.points) {
      auto val = trilinear_interpolate(lat, vf, q);
      point_uv.push_back({val[0], val[1]});
    }
    double solve_s = solve.seconds();
    write_uv(o.io.out, point_uv);
    double energy = E1 / (o.a * o.a) + o.a * o.a * E2;
    report = base_report("rect-harmonic", o.io, p, lat, total.seconds(), solve_s);
    report["parameters"]["a"] = o.a;
    report["a"] = o.a;
    report["E1"] = E1;
    report["E2"] = E2;
    report["energy"] = energy;
    report["conformality_gap"] = energy - 1.0;
    report["solver"] = {{"u1", solve_json(pair.stats1)}, {"u2", solve_json(pair.stats2)}};
  }
  write_report(o.io.report, report);
}

struct TorusCmd {
  CommonIo io;
  std::string cuts;  // JSON path; empty = revolution preset built from R
  double R = 2.0;
  std::vector<double> tau;  // harmonic only: Re Im
  double tol = 1e-8;
  int max_iters = -1;
};

void run_torus(const TorusCmd& o, bool conformal) {
  Timer total;
  Prepared p = prepare(o.io);
  std::array<MembraneGeometry, 2> cuts =
      o.cuts.empty() ? torus_revolution_cuts(o.R) : load_torus_cuts(o.cuts);
  for (auto& m : cuts) m = transform_membrane(m, p.tf);
  SolveOptions so{o.tol, o.max_iters};
  Timer solve;
  TorusResult res;
  if (conformal) {
    res = conformal_torus(p.cloud, {o.io.epsilon, o.io.n}, cuts, so);
  } else {
    std::complex<double> tau{o.tau.at(0), o.tau.at(1)};
    if (tau.imag() <= 0.0) throw error(errc::validation, "tau must lie in the upper half-plane");
    res = harmonic_torus(p.cloud, {o.io.epsilon, o.io.n}, cuts, tau, so);
  }
  double solve_s = solve.seconds();
  std::vector<std::array<double, 2>> rows;
  rows.reserve(res.point_map.size());
  for (auto z : res.point_map) rows.push_back({z.real(), z.imag()});
  write_uv(o.io.out, rows);

  json report = base_report(conformal ? "torus-conformal" : "torus-harmonic", o.io, p,
                            res.lattice, total.seconds(), solve_s);
  report["parameters"]["cuts"] =
      o.cuts.empty() ? "builtin:revolution(R=" + std::to_string(o.R) + ")" : o.cuts;
  report["tau"] = {res.tau.real(), res.tau.imag()};
  report["tau_reduced"] = {res.tau_reduced.real(), res.tau_reduced.imag()};
  report["energy"] = res.energy;
  report["normalized_energy"] = res.normalized_energy;
  report["energy_coeffs"] = {{"P", res.coeffs.P},
                             {"Q", res.coeffs.Q},
                             {"R_re", res.coeffs.R_re},
                             {"R_im", res.coeffs.R_im}};
  report["residuals"] = {{"balanced", res.residual},
                         {"u1", solve_json(res.basis.stats1)},
                         {"u2", solve_json(res.basis.stats2)}};
  write_report(o.io.report, report);
}

struct HypCmd {
  CommonIo io;
  std::string cuts, group;          // JSON paths; empty = built-in presets
  std::string emit_cuts, emit_group;  // dump the active configuration
  std::string family = "none";      // conformal only
  double tol = 1e-7;
  int max_iters = 5000;
  int max_evals = 60;
};

void run_hyp(const HypCmd& o, bool conformal) {
  Timer total;
  Prepared p = prepare(o.io);
  std::vector<HypMembrane> cuts = o.cuts.empty() ? genus2_dumbbell_cuts() : load_hyp_cuts(o.cuts);
  FuchsianGroupSpec group = o.group.empty() ? octagon_group() : load_group(o.group);
  if (!o.emit_cuts.empty()) {
    std::ofstream out = open_out(o.emit_cuts);
    out << hyp_cuts_json(cuts).dump(2) << '\n';
  }
  if (!o.emit_group.empty()) {
    std::ofstream out = open_out(o.emit_group);
    out << group_json(group).dump(2) << '\n';
  }
  cuts = transform_cuts(std::move(cuts), p.tf);

  HypFlowOptions flow;
  flow.tol = o.tol;
  flow.max_sweeps = o.max_iters;
  Timer solve;
  HypResult res;
  if (conformal) {
    HypFamily fam;
    if (o.family == "none") {
      fam.dim = 0;
      fam.make = [group](const std::vector<double>&) { return group; };
    } else if (o.family == "fn-twist") {
      fam = fn_twist_family(group);
    } else if (o.family == "conjugation") {
      fam = conjugation_family(group);
    } else {
      throw error(errc::config, "unknown family \"" + o.family + "\"");
    }
    HypSearchOptions so;
    so.flow = flow;
    so.max_evals = o.max_evals;
    res = conformal_hyperbolic(p.cloud, {o.io.epsilon, o.io.n}, cuts, fam, so);
  } else {
    res = harmonic_hyperbolic_pipeline(p.cloud, {o.io.epsilon, o.io.n}, cuts, group, flow);
  }
  double solve_s = solve.seconds();
  std::vector<std::array<double, 2>> rows;
  rows.reserve(res.point_map.size());
  for (const Vec3& q : res.point_map) rows.push_back(disk_coords(q));
  write_uv(o.io.out, rows);

  json report = base_report(conformal ? "hyp-conformal" : "hyp-harmonic", o.io, p, res.lattice,
                            total.seconds(), solve_s);
  report["parameters"].update({{"cuts", o.cuts.empty() ? "builtin:genus2-dumbbell" : o.cuts},
                               {"group", o.group.empty() ? "builtin:octagon" : o.group},
                               {"tol", o.tol},
                               {"max_iters", o.max_iters}});
  report["energy"] = res.energy.dirichlet;
  report["cosh_energy"] = res.energy.cosh_energy;
  report["normalized_energy"] = res.normalized_energy;
  report["iterations"] = res.stats.sweeps;
  report["converged"] = res.stats.converged;
  report["movement"] = res.stats.movement;
  report["energy_monotone"] = res.stats.energy_monotone;
  report["balanced_residual"] = res.balanced;
  report["relation_residual"] = res.relation_residual;
  if (conformal) {
    report["parameters"]["family"] = o.family;
    report["best_params"] = res.best_params;
    report["search_evaluations"] = res.search_evaluations;
  }
  write_report(o.io.report, report);
}

struct LatticeCmd {
  CommonIo io;
  std::string dump;
};

void run_lattice_info(const LatticeCmd& o) {
  Timer total;
  Prepared p = prepare(o.io);
  Timer solve;
  Lattice lat = build_lattice(p.cloud, {o.io.epsilon, o.io.n});
  double solve_s = solve.seconds();
  if (!o.dump.empty()) dump_lattice(lat, o.dump);
  json report = base_report("lattice-info", o.io, p, lat, total.seconds(), solve_s);
  report["points"] = p.cloud.points.size();
  report["labeled"] = p.cloud.has_labels();
  write_report(o.io.report, report);
  std::printf("%d vertices, %d edges (n=%d, epsilon=%g)\n", lat.num_vertices(), lat.num_edges(),
              lat.n, lat.epsilon);
}

struct GenCmd {
  std::string kind, out, report;
  int count = 20000;
  uint64_t seed = 1;
  double rx = 1.0, ry = 0.8, rz = 0.6;
  double lx = 2.0, ly = 1.0, boundary_frac = 0.1;
  double R = 0.0, r = 0.0;  // 0 = per-kind default
  double c = 1.6, rod_r = 0.5, blend = 12.0;
};

void run_gen(const GenCmd& o) {
  if (o.count < 100) throw error(errc::validation, "count must be at least 100");
  PointCloud cloud;
  if (o.kind == "sphere") {
    cloud = gen_sphere(o.count, o.seed);
  } else if (o.kind == "ellipsoid") {
    cloud = gen_ellipsoid(o.rx, o.ry, o.rz, o.count, o.seed);
  } else if (o.kind == "slab") {
    cloud = gen_slab(o.lx, o.ly, o.count, o.seed, o.boundary_frac);
  } else if (o.kind == "torus") {
    cloud = gen_torus(o.R > 0.0 ? o.R : 2.0, o.r > 0.0 ? o.r : 1.0, o.count, o.seed);
  } else if (o.kind == "genus2") {
    Genus2Shape s;
    if (o.R > 0.0) s.R = o.R;
    if (o.r > 0.0) s.r = o.r;
    s.c = o.c;
    s.rod_r = o.rod_r;
    s.blend = o.blend;
    cloud = gen_genus2(s, o.count, o.seed);
  } else {
    throw error(errc::config, "unknown surface kind \"" + o.kind + "\"");
  }
  write_cloud(o.out, cloud);
  if (!o.report.empty()) {
    json report = {{"command", "gen-test-surface"},
                   {"kind", o.kind},
                   {"count", o.count},
                   {"seed", o.seed},
                   {"labeled", cloud.has_labels()}};
    write_report(o.report, report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meshless surface uniformization over point-cloud lattices"};
  app.require_subcommand(1);

  auto sph = std::make_shared<SphereCmd>();
  {
    CLI::App* c = app.add_subcommand("sphere", "harmonic map of a genus-0 cloud to the unit sphere");
    add_common(c, sph->io);
    c->add_option("--dt", sph->dt, "flow step size (default 1/(2*max_degree))");
    c->add_option("--tol", sph->tol, "residual tolerance, scaled by mean degree");
    c->add_option("--max-iters", sph->max_iters, "flow iteration cap");
    c->callback([sph] { run_sphere(*sph); });
  }

  auto rh = std::make_shared<RectCmd>();
  {
    CLI::App* c = app.add_subcommand("rect-harmonic", "harmonic map of a labeled slab to a fixed rectangle");
    add_common(c, rh->io);
    c->add_option("--a", rh->a, "rectangle parameter: target is [0,1/a] x [0,a]")->required();
    c->add_option("--tol", rh->tol, "linear solver relative residual");
    c->add_option("--max-iters", rh->max_iters, "linear solver iteration cap");
    c->callback([rh] { run_rect(*rh, false); });
  }

  auto rc = std::make_shared<RectCmd>();
  {
    CLI::App* c = app.add_subcommand("rect-conformal", "conformal map of a labeled slab to its modulus rectangle");
    add_common(c, rc->io);
    c->add_option("--tol", rc->tol, "linear solver relative residual");
    c->add_option("--max-iters", rc->max_iters, "linear solver iteration cap");
    c->callback([rc] { run_rect(*rc, true); });
  }

  auto th = std::make_shared<TorusCmd>();
  {
    CLI::App* c = app.add_subcommand("torus-harmonic", "harmonic map of a genus-1 cloud to a fixed flat torus");
    add_common(c, th->io);
    c->add_option("--tau", th->tau, "target modulus, two numbers: Re Im")->expected(2)->required();
    c->add_option("--cuts", th->cuts, "cut membranes JSON (default: revolution preset)");
    c->add_option("--R", th->R, "center-circle radius for the revolution preset");
    c->add_option("--tol", th->tol, "linear solver relative residual");
    c->add_option("--max-iters", th->max_iters, "linear solver iteration cap");
    c->callback([th] { run_torus(*th, false); });
  }

  auto tc = std::make_shared<TorusCmd>();
  {
    CLI::App* c = app.add_subcommand("torus-conformal", "conformal map of a genus-1 cloud to its modulus torus");
    add_common(c, tc->io);
    c->add_option("--cuts", tc->cuts, "cut membranes JSON (default: revolution preset)");
    c->add_option("--R", tc->R, "center-circle radius for the revolution preset");
    c->add_option("--tol", tc->tol, "linear solver relative residual");
    c->add_option("--max-iters", tc->max_iters, "linear solver iteration cap");
    c->callback([tc] { run_torus(*tc, true); });
  }

  auto hh = std::make_shared<HypCmd>();
  {
    CLI::App* c = app.add_subcommand("hyp-harmonic", "harmonic map of a genus-2 cloud to a fixed hyperbolic surface");
    add_common(c, hh->io);
    c->add_option("--cuts", hh->cuts, "cut membranes JSON (default: genus-2 dumbbell preset)");
    c->add_option("--group", hh->group, "Fuchsian group JSON (default: regular octagon)");
    c->add_option("--emit-cuts", hh->emit_cuts, "write the active cut system as JSON");
    c->add_option("--emit-group", hh->emit_group, "write the active group as JSON");
    c->add_option("--tol", hh->tol, "max per-vertex displacement per sweep");
    c->add_option("--max-iters", hh->max_iters, "sweep cap");
    c->callback([hh] { run_hyp(*hh, false); });
  }

  auto hc = std::make_shared<HypCmd>();
  {
    CLI::App* c = app.add_subcommand("hyp-conformal", "minimize harmonic energy over a family of hyperbolic structures");
    add_common(c, hc->io);
    c->add_option("--cuts", hc->cuts, "cut membranes JSON (default: genus-2 dumbbell preset)");
    c->add_option("--group", hc->group, "base Fuchsian group JSON (default: regular octagon)");
    c->add_option("--emit-cuts", hc->emit_cuts, "write the active cut system as JSON");
    c->add_option("--emit-group", hc->emit_group, "write the active group as JSON");
    c->add_option("--family", hc->family, "group family: none, fn-twist, conjugation")
        ->check(CLI::IsMember({"none", "fn-twist", "conjugation"}));
    c->add_option("--tol", hc->tol, "max per-vertex displacement per sweep");
    c->add_option("--max-iters", hc->max_iters, "sweep cap per evaluation");
    c->add_option("--max-evals", hc->max_evals, "search evaluation cap");
    c->callback([hc] { run_hyp(*hc, true); });
  }

  auto li = std::make_shared<LatticeCmd>();
  {
    CLI::App* c = app.add_subcommand("lattice-info", "build the lattice and report its statistics");
    add_common(c, li->io, /*needs_out=*/false);
    c->add_option("--dump-lattice", li->dump, "write \"v i j k\" / \"e a b\" text dump");
    c->callback([li] { run_lattice_info(*li); });
  }

  auto gen = std::make_shared<GenCmd>();
  {
    CLI::App* c = app.add_subcommand("gen-test-surface", "sample an analytic test surface");
    c->add_option("--kind", gen->kind, "sphere, ellipsoid, slab, torus, or genus2")
        ->required()
        ->check(CLI::IsMember({"sphere", "ellipsoid", "slab", "torus", "genus2"}));
    c->add_option("--out", gen->out, "output xyz / labeled-xyz file")->required();
    c->add_option("--report", gen->report, "JSON parameter echo");
    c->add_option("--count", gen->count, "sample count (>= 100)");
    c->add_option("--seed", gen->seed, "RNG seed");
    c->add_option("--rx", gen->rx, "ellipsoid semi-axis x");
    c->add_option("--ry", gen->ry, "ellipsoid semi-axis y");
    c->add_option("--rz", gen->rz, "ellipsoid semi-axis z");
    c->add_option("--lx", gen->lx, "slab width");
    c->add_option("--ly", gen->ly, "slab height");
    c->add_option("--boundary-frac", gen->boundary_frac, "slab fraction of samples on the sides");
    c->add_option("--R", gen->R, "torus / genus2 center-circle radius");
    c->add_option("--r", gen->r, "torus / genus2 tube radius");
    c->add_option("--c", gen->c, "genus2 handle offset along x");
    c->add_option("--rod-r", gen->rod_r, "genus2 connecting rod radius");
    c->add_option("--blend", gen->blend, "genus2 smooth-min sharpness");
    c->callback([gen] { run_gen(*gen); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "latmap: %s\n", e.what());
    return 2;
  } catch (const error& e) {
    std::fprintf(stderr, "latmap: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "latmap: %s\n", e.what());
    return 1;
  }
  return 0;
}
