#include "acfb/replacement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace acfb {

namespace {

// Lagged-diffusivity solver for the autonomous convex energy
// sum over cells of |cell| * phi~(sqrt(|grad w|^2 + delta^2)).
// Each outer step freezes the cell weights a_c = phi~'(m_c)/m_c, solves the
// resulting SPD system by Jacobi-preconditioned CG, and backtracks on the
// smoothed energy, which makes the outer loop monotone up to summation
// roundoff for any p,q.
struct KacanovSolver {
  const RegularizedPhi& reg;
  const Grid& g;
  const std::vector<char>& free_mask;
  const ReplaceOptions& opt;

  int n0, ncx, ncy;
  double h1, h2, measure;

  KacanovSolver(const RegularizedPhi& r, const Grid& grid, const std::vector<char>& fm,
                const ReplaceOptions& o)
      : reg(r), g(grid), free_mask(fm), opt(o) {
    n0 = g.n[0];
    ncx = g.n[0] - 1;
    ncy = g.dim == 2 ? g.n[1] - 1 : 1;
    h1 = g.h[0];
    h2 = g.dim == 2 ? g.h[1] : 1.0;
    measure = g.cell_measure();
  }

  void cell_grad(const std::vector<double>& v, int ci, int cj, double& gx, double& gy) const {
    int a = ci + n0 * cj;
    gx = (v[a + 1] - v[a]) / h1;
    gy = g.dim == 2 ? (v[a + n0] - v[a]) / h2 : 0.0;
  }

  void compute_weights(const std::vector<double>& v, double delta,
                       std::vector<double>& wts) const {
    wts.assign(static_cast<std::size_t>(ncx) * ncy, 0.0);
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        double gx, gy;
        cell_grad(v, ci, cj, gx, gy);
        double m = std::sqrt(gx * gx + gy * gy + delta * delta);
        wts[ci + ncx * cj] = measure * reg.deriv(m) / m;
      }
    }
  }

  // y = A(wts) x, the gradient of (1/2) sum wts_c |grad x|^2
  void apply(const std::vector<double>& wts, const std::vector<double>& x,
             std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        int a = ci + n0 * cj;
        double wc = wts[ci + ncx * cj];
        double gx = (x[a + 1] - x[a]) / h1;
        y[a + 1] += wc * gx / h1;
        y[a] -= wc * gx / h1;
        if (g.dim == 2) {
          double gy = (x[a + n0] - x[a]) / h2;
          y[a + n0] += wc * gy / h2;
          y[a] -= wc * gy / h2;
        }
      }
    }
  }

  double smoothed_energy(const std::vector<double>& v, double delta) const {
    double s = 0.0;
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        double gx, gy;
        cell_grad(v, ci, cj, gx, gy);
        s += reg.eval(std::sqrt(gx * gx + gy * gy + delta * delta));
      }
    }
    return s * measure;
  }

  double free_residual_sup(const std::vector<double>& wts, const std::vector<double>& v,
                           std::vector<double>& scratch) const {
    apply(wts, v, scratch);
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (free_mask[i]) r = std::max(r, std::fabs(scratch[i]));
    return r;
  }

  // Solves A v = 0 on the free nodes with the current fixed values; v is the
  // full vector and fixed entries are never touched.
  int cg(const std::vector<double>& wts, std::vector<double>& v) const {
    int N = static_cast<int>(v.size());
    std::vector<double> diag(N, 1.0), r(N, 0.0), z(N, 0.0), p(N, 0.0), Ap(N, 0.0);
    for (int i = 0; i < N; ++i) diag[i] = 0.0;
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        int a = ci + n0 * cj;
        double wc = wts[ci + ncx * cj];
        diag[a] += wc / (h1 * h1);
        diag[a + 1] += wc / (h1 * h1);
        if (g.dim == 2) {
          diag[a] += wc / (h2 * h2);
          diag[a + n0] += wc / (h2 * h2);
        }
      }
    }
    for (int i = 0; i < N; ++i)
      if (diag[i] <= 0.0) diag[i] = 1.0;

    apply(wts, v, Ap);
    for (int i = 0; i < N; ++i) r[i] = free_mask[i] ? -Ap[i] : 0.0;
    double rz = 0.0;
    for (int i = 0; i < N; ++i) {
      z[i] = r[i] / diag[i];
      rz += r[i] * z[i];
    }
    double target = opt.cg_rtol * opt.cg_rtol * rz;
    if (rz <= 0.0) return 0;
    p = z;
    int it = 0;
    for (; it < opt.max_cg; ++it) {
      apply(wts, p, Ap);
      double pAp = 0.0;
      for (int i = 0; i < N; ++i)
        if (free_mask[i]) pAp += p[i] * Ap[i];
      if (!(pAp > 0.0)) break;
      double alpha = rz / pAp;
      for (int i = 0; i < N; ++i) {
        if (!free_mask[i]) continue;
        v[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      double rz_new = 0.0;
      for (int i = 0; i < N; ++i) {
        z[i] = r[i] / diag[i];
        rz_new += r[i] * z[i];
      }
      if (rz_new <= target) {
        ++it;
        break;
      }
      double beta = rz_new / rz;
      for (int i = 0; i < N; ++i) p[i] = free_mask[i] ? z[i] + beta * p[i] : 0.0;
      rz = rz_new;
    }
    return it;
  }

  Field solve(const Field& data, ReplaceStats& st) const {
    Field w = data;
    std::vector<double> wts, scratch(w.v.size());
    std::vector<double> deltas;
    for (double d = opt.delta0; d > opt.delta_min * (1.0 + 1e-12); d *= 1e-2)
      deltas.push_back(d);
    deltas.push_back(opt.delta_min);

    double res0 = -1.0;
    for (double delta : deltas) {
      bool last = delta == deltas.back();
      double stage_tol_factor = last ? 1.0 : 1e2;
      for (int outer = 0; outer < opt.max_outer; ++outer) {
        compute_weights(w.v, delta, wts);
        double res = free_residual_sup(wts, w.v, scratch);
        if (res0 < 0.0) res0 = std::max(res, 1e-300);
        st.residual = res;
        if (res <= stage_tol_factor * opt.gtol * std::max(res0, 1.0)) break;

        std::vector<double> v = w.v;
        int cg_it = cg(wts, v);
        st.cg_iterations += cg_it;
        ++st.outer_iterations;

        double E0 = smoothed_energy(w.v, delta);
        // Near the fixed point the true decrease of a full step drops below
        // the roundoff of the energy sum; demanding strict descent there
        // shrinks theta to noise-sized steps and stalls the residual. Accept
        // anything within the summation noise floor instead.
        double noise = 4.0 * std::numeric_limits<double>::epsilon() *
                       static_cast<double>(ncx) * ncy * std::max(std::fabs(E0), 1.0);
        double theta = 1.0;
        bool ok = false;
        for (int bt = 0; bt < 40; ++bt) {
          for (std::size_t i = 0; i < w.v.size(); ++i)
            scratch[i] = free_mask[i] ? w.v[i] + theta * (v[i] - w.v[i]) : w.v[i];
          if (smoothed_energy(scratch, delta) <= E0 + noise) {
            ok = true;
            break;
          }
          theta *= 0.5;
        }
        if (!ok) break;
        double step = 0.0;
        for (std::size_t i = 0; i < w.v.size(); ++i) {
          step = std::max(step, std::fabs(scratch[i] - w.v[i]));
          w.v[i] = scratch[i];
        }
        if (step <= 1e-15 * std::max(1.0, w.sup_abs())) break;
      }
    }
    compute_weights(w.v, opt.delta_min, wts);
    double res_final = free_residual_sup(wts, w.v, scratch);
    st.residual = res_final;
    st.converged = res_final <= opt.gtol * std::max(res0 < 0.0 ? 0.0 : res0, 1.0);
    return w;
  }
};

}  // namespace

Field dirichlet_solve(const RegularizedPhi& reg, const Field& data, const ReplaceOptions& opt,
                      ReplaceStats* stats) {
  const Grid& g = data.grid;
  std::vector<char> free_mask(g.node_count(), 0);
  int nfree = 0;
  for (int i = 0; i < g.node_count(); ++i) {
    free_mask[i] = data.fixed[i] ? 0 : 1;
    nfree += free_mask[i];
  }
  ReplaceStats st;
  if (nfree == 0) {
    st.converged = true;
    if (stats) *stats = st;
    return data;
  }
  KacanovSolver solver(reg, g, free_mask, opt);
  Field w = solver.solve(data, st);
  if (stats) *stats = st;
  return w;
}

Field harmonic_replacement(const RegularizedPhi& reg, const Field& u, const Ball& b,
                           const ReplaceOptions& opt, ReplaceStats* stats) {
  const Grid& g = u.grid;
  BallNodes bn = ball_nodes(g, b);
  Field data = u;
  std::fill(data.fixed.begin(), data.fixed.end(), 1);
  for (int idx : bn.interior)
    if (!u.fixed[idx]) data.fixed[idx] = 0;
  Field w = dirichlet_solve(reg, data, opt, stats);
  w.fixed = u.fixed;
  return w;
}

}  // namespace acfb
