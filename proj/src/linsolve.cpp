#include "latmap/linsolve.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "latmap/errors.hpp"

namespace latmap {

VertexField apply_laplacian(const Lattice& lat, const VertexField& f) {
  const int V = lat.num_vertices();
  VertexField out;
  out.comps = f.comps;
  out.data.assign(f.data.size(), 0.0);
  for (int comp = 0; comp < f.comps; ++comp) {
    const double* fc = f.data.data() + static_cast<size_t>(comp) * V;
    double* oc = out.data.data() + static_cast<size_t>(comp) * V;
    for (int32_t v = 0; v < V; ++v) {
      double acc = 0.0;
      for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t)
        acc += fc[lat.adj_vtx[t]] - fc[v];
      oc[v] = acc;
    }
  }
  return out;
}

namespace {

double vdot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void subtract_mean(std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

using Operator = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Preconditioned CG with diagonal preconditioner.  With zero_mean set, the
// system is solved on the subspace orthogonal to constants (the operator must
// preserve it).  Throws on hitting the iteration cap.
int pcg(const Operator& apply_op, const std::vector<double>& b, std::vector<double>& x,
        const std::vector<double>& diag_inv, double tol, int max_iters, bool zero_mean,
        double* rel_out) {
  const size_t n = b.size();
  x.assign(n, 0.0);
  double bnorm = std::sqrt(vdot(b, b));
  if (bnorm == 0.0) {
    *rel_out = 0.0;
    return 0;
  }

  std::vector<double> r = b, z(n), p(n), Ap(n);
  auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (size_t i = 0; i < n; ++i) zz[i] = diag_inv[i] * rr[i];
    if (zero_mean) subtract_mean(zz);
  };
  precond(r, z);
  p = z;
  double rz = vdot(r, z);
  double rel = std::sqrt(vdot(r, r)) / bnorm;
  int it = 0;
  while (rel > tol) {
    if (it >= max_iters)
      throw error(errc::solver, "linear solver stalled after " + std::to_string(it) +
                                    " iterations, relative residual " + std::to_string(rel));
    apply_op(p, Ap);
    double alpha = rz / vdot(p, Ap);
    for (size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    precond(r, z);
    double rz_new = vdot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;
    rel = std::sqrt(vdot(r, r)) / bnorm;
  }
  *rel_out = rel;
  return it;
}

}  // namespace

VertexField solve_dirichlet(const Lattice& lat, const std::vector<int32_t>& pinned,
                            const VertexField& pinned_values, const SolveOptions& opts,
                            SolveStats* stats) {
  const int V = lat.num_vertices();
  if (pinned.empty()) throw error(errc::validation, "no pinned vertices");

  std::vector<int32_t> free_idx(V, -1);
  std::vector<char> is_pinned(V, 0);
  for (int32_t v : pinned) is_pinned[v] = 1;
  std::vector<int32_t> free_list;
  for (int32_t v = 0; v < V; ++v)
    if (!is_pinned[v]) {
      free_idx[v] = static_cast<int32_t>(free_list.size());
      free_list.push_back(v);
    }

  VertexField out;
  out.comps = pinned_values.comps;
  out.data.assign(static_cast<size_t>(out.comps) * V, 0.0);
  for (size_t i = 0; i < pinned.size(); ++i)
    for (int comp = 0; comp < out.comps; ++comp)
      out.at(comp, pinned[i]) = pinned_values.at(comp, static_cast<int>(i));

  SolveStats agg;
  if (free_list.empty()) {
    agg.converged = true;
    if (stats) *stats = agg;
    return out;
  }

  const size_t F = free_list.size();
  std::vector<double> diag_inv(F);
  for (size_t i = 0; i < F; ++i) {
    int32_t v = free_list[i];
    int deg = lat.adj_off[v + 1] - lat.adj_off[v];
    diag_inv[i] = deg > 0 ? 1.0 / deg : 1.0;
  }

  // Free-subsystem action: (deg(i) x_i - sum over free neighbors) per row.
  auto apply_op = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (size_t i = 0; i < F; ++i) {
      int32_t v = free_list[i];
      double acc = (lat.adj_off[v + 1] - lat.adj_off[v]) * x[i];
      for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
        int32_t w = lat.adj_vtx[t];
        if (free_idx[w] >= 0) acc -= x[free_idx[w]];
      }
      y[i] = acc;
    }
  };

  int max_iters = opts.max_iters >= 0 ? opts.max_iters : 10 * V;
  std::vector<double> b(F), x(F);
  for (int comp = 0; comp < out.comps; ++comp) {
    for (size_t i = 0; i < F; ++i) {
      int32_t v = free_list[i];
      double acc = 0.0;
      for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t) {
        int32_t w = lat.adj_vtx[t];
        if (is_pinned[w]) acc += out.at(comp, w);
      }
      b[i] = acc;
    }
    double rel = 0.0;
    int it = pcg(apply_op, b, x, diag_inv, opts.tol, max_iters, false, &rel);
    agg.iterations = std::max(agg.iterations, it);
    agg.rel_residual = std::max(agg.rel_residual, rel);
    for (size_t i = 0; i < F; ++i) out.at(comp, free_list[i]) = x[i];
  }
  agg.converged = true;
  if (stats) *stats = agg;
  return out;
}

VertexField solve_singular(const Lattice& lat, const VertexField& rhs,
                           const SolveOptions& opts, SolveStats* stats) {
  const int V = lat.num_vertices();
  std::vector<double> diag_inv(V);
  for (int32_t v = 0; v < V; ++v) {
    int deg = lat.adj_off[v + 1] - lat.adj_off[v];
    diag_inv[v] = deg > 0 ? 1.0 / deg : 1.0;
  }

  // SPD form of the graph Laplacian: y = (D - A) x.
  auto apply_op = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (int32_t v = 0; v < V; ++v) {
      double acc = (lat.adj_off[v + 1] - lat.adj_off[v]) * x[v];
      for (int32_t t = lat.adj_off[v]; t < lat.adj_off[v + 1]; ++t)
        acc -= x[lat.adj_vtx[t]];
      y[v] = acc;
    }
  };

  VertexField out;
  out.comps = rhs.comps;
  out.data.assign(rhs.data.size(), 0.0);
  int max_iters = opts.max_iters >= 0 ? opts.max_iters : 10 * V;
  SolveStats agg;

  std::vector<double> b(V), x(V);
  for (int comp = 0; comp < rhs.comps; ++comp) {
    double sum = 0.0, nrm2 = 0.0;
    for (int32_t v = 0; v < V; ++v) {
      double r = rhs.at(comp, v);
      sum += r;
      nrm2 += r * r;
    }
    if (std::fabs(sum) > 1e-10 * std::sqrt(nrm2))
      throw error(errc::validation, "incompatible rhs: component sum is not zero");

    // (D - A) f = -rhs, i.e. the Laplacian equation Lf = rhs; project away
    // the constant mode the sum check says is only there as roundoff.
    for (int32_t v = 0; v < V; ++v) b[v] = -rhs.at(comp, v);
    subtract_mean(b);

    double rel = 0.0;
    int it = pcg(apply_op, b, x, diag_inv, opts.tol, max_iters, true, &rel);
    agg.iterations = std::max(agg.iterations, it);
    agg.rel_residual = std::max(agg.rel_residual, rel);

    subtract_mean(x);
    for (int32_t v = 0; v < V; ++v) out.at(comp, v) = x[v];
  }
  agg.converged = true;
  if (stats) *stats = agg;
  return out;
}

}  // namespace latmap
