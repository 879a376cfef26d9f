#include "acfb/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace acfb {

namespace {

// Smoothed energy and gradient in one pass. chi_eps(s) = clamp(s/eps, 0, 1)
// integrated by corner-mean quadrature, so every sub-eps corner feels the
// indicator pressure lambda/(2^d eps); an argmax-corner variant leaves the
// landscape riddled with switching kinks that stall the line search.
struct SmoothedProblem {
  const Grid* g;
  const BakedPhi* baked;
  double lambda;
  double eps, delta;

  // diag, when given, collects the weighted-stiffness diagonal used as a
  // Jacobi preconditioner by descend.
  double energy_grad(const std::vector<double>& v, std::vector<double>& grad,
                     std::vector<double>* diag = nullptr) const {
    const Grid& gr = *g;
    std::fill(grad.begin(), grad.end(), 0.0);
    if (diag) std::fill(diag->begin(), diag->end(), 0.0);
    double measure = gr.cell_measure();
    double total = 0.0;
    double d2 = delta * delta;
    if (gr.dim == 1) {
      double h = gr.h[0];
      int nc = gr.n[0] - 1;
      double push = 0.5 * lambda / eps;
      for (int c = 0; c < nc; ++c) {
        double gx = (v[c + 1] - v[c]) / h;
        double m = std::sqrt(gx * gx + d2);
        total += baked->eval(c, m);
        double w = baked->deriv(c, m) / m;
        grad[c + 1] += measure * w * gx / h;
        grad[c] -= measure * w * gx / h;
        if (diag) {
          (*diag)[c] += measure * w / (h * h);
          (*diag)[c + 1] += measure * w / (h * h);
        }
        for (int corner : {c, c + 1}) {
          double s = v[corner];
          if (s > 0.0) total += 0.5 * lambda * std::min(s / eps, 1.0);
          // keep the one-sided derivative at s = 0: it pins dead nodes
          // against the Dirichlet pull-up (projection absorbs the excess)
          if (s < eps) grad[corner] += measure * push;
        }
      }
      return total * measure;
    }
    int ncx = gr.n[0] - 1, ncy = gr.n[1] - 1;
    int n0 = gr.n[0];
    double h1 = gr.h[0], h2 = gr.h[1];
    double push = 0.25 * lambda / eps;
    for (int cj = 0; cj < ncy; ++cj) {
      for (int ci = 0; ci < ncx; ++ci) {
        int a = ci + n0 * cj;
        int c = ci + ncx * cj;
        double gx = (v[a + 1] - v[a]) / h1;
        double gy = (v[a + n0] - v[a]) / h2;
        double m = std::sqrt(gx * gx + gy * gy + d2);
        total += baked->eval(c, m);
        double w = baked->deriv(c, m) / m;
        grad[a + 1] += measure * w * gx / h1;
        grad[a + n0] += measure * w * gy / h2;
        grad[a] -= measure * w * (gx / h1 + gy / h2);
        if (diag) {
          (*diag)[a] += measure * w * (1.0 / (h1 * h1) + 1.0 / (h2 * h2));
          (*diag)[a + 1] += measure * w / (h1 * h1);
          (*diag)[a + n0] += measure * w / (h2 * h2);
        }
        for (int corner : {a, a + 1, a + n0, a + n0 + 1}) {
          double s = v[corner];
          if (s > 0.0) total += 0.25 * lambda * std::min(s / eps, 1.0);
          if (s < eps) grad[corner] += measure * push;
        }
      }
    }
    return total * measure;
  }
};

// Projected descent preconditioned by the weighted-stiffness diagonal, with
// a backtracking line search; the smoothed energy never increases within a
// stage. Plain or Barzilai-Borwein steps stall on the indicator's
// cell-crossing kinks; the Jacobi scaling keeps the natural step at
// alpha = 1 regardless of h.
int descend(const SmoothedProblem& prob, Field& u, double gtol, int max_inner) {
  int n = static_cast<int>(u.v.size());
  std::vector<double> grad(n), diag(n), vnew(n), gnew(n), dnew(n);
  double E = prob.energy_grad(u.v, grad, &diag);
  for (int i = 0; i < n; ++i)
    if (u.fixed[i]) grad[i] = 0.0;
  // cap the Jacobi step below 1: at alpha = 1 the highest grid mode has
  // iteration factor -1 and the sweep rings forever at constant energy
  const double alpha_max = 0.7;
  double alpha = alpha_max;
  int stall = 0;
  int it = 0;
  for (; it < max_inner; ++it) {
    double Enew = 0.0;
    bool accepted = false;
    int bt = 0;
    for (; bt < 60; ++bt) {
      for (int i = 0; i < n; ++i) {
        if (u.fixed[i]) {
          vnew[i] = u.v[i];
          continue;
        }
        double x = u.v[i] - alpha * grad[i] / std::max(diag[i], 1e-300);
        vnew[i] = std::max(x, 0.0);
      }
      Enew = prob.energy_grad(vnew, gnew, &dnew);
      double decrease = 0.0;
      for (int i = 0; i < n; ++i) decrease += grad[i] * (u.v[i] - vnew[i]);
      if (Enew <= E - 1e-4 * decrease || Enew < E) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    for (int i = 0; i < n; ++i)
      if (u.fixed[i]) gnew[i] = 0.0;
    u.v.swap(vnew);
    grad.swap(gnew);
    diag.swap(dnew);
    if (bt == 0) alpha = std::min(1.4 * alpha, alpha_max);
    double drop = E - Enew;
    E = Enew;
    // the indicator landscape has cell-crossing plateaus; give the iteration
    // a few flat steps before declaring the stage done
    if (drop <= gtol * std::max(1.0, std::fabs(E))) {
      if (++stall >= 12) { ++it; break; }
    } else {
      stall = 0;
    }
  }
  return it;
}

Field coarsen_nested(const Field& fine) {
  const Grid& fg = fine.grid;
  Grid cg = fg.dim == 1
                ? Grid::line(fg.lo[0], fg.hi[0], (fg.n[0] - 1) / 2 + 1)
                : Grid::box(fg.lo[0], fg.hi[0], fg.lo[1], fg.hi[1], (fg.n[0] - 1) / 2 + 1,
                            (fg.n[1] - 1) / 2 + 1);
  Field c = Field::zeros(cg);
  for (int j = 0; j < cg.n[1]; ++j)
    for (int i = 0; i < cg.n[0]; ++i)
      c.v[cg.node_index(i, j)] = fine.v[fg.node_index(2 * i, fg.dim == 2 ? 2 * j : 0)];
  return c;
}

// Nested prolongation; fixed nodes take the fine-level data directly.
void prolong_into(const Field& coarse, Field& fine) {
  const Grid& fg = fine.grid;
  for (int j = 0; j < fg.n[1]; ++j) {
    for (int i = 0; i < fg.n[0]; ++i) {
      int idx = fg.node_index(i, j);
      if (fine.fixed[idx]) continue;
      fine.v[idx] = interpolate(coarse, fg.node(i, j));
    }
  }
}

struct LocalEnergy {
  const Grid* g;
  const BakedPhi* baked;
  double lambda, tau;
  const std::vector<double>* v;

  double cell(int ci, int cj) const {
    const Grid& gr = *g;
    const std::vector<double>& u = *v;
    if (gr.dim == 1) {
      double gx = (u[ci + 1] - u[ci]) / gr.h[0];
      double val = baked->eval(ci, std::fabs(gx));
      if (u[ci] > tau || u[ci + 1] > tau) val += lambda;
      return val;
    }
    int n0 = gr.n[0];
    int a = ci + n0 * cj;
    double gx = (u[a + 1] - u[a]) / gr.h[0];
    double gy = (u[a + n0] - u[a]) / gr.h[1];
    double val = baked->eval(ci + (n0 - 1) * cj, std::sqrt(gx * gx + gy * gy));
    if (u[a] > tau || u[a + 1] > tau || u[a + n0] > tau || u[a + n0 + 1] > tau) val += lambda;
    return val;
  }

  // total over cells touching node (i,j)
  double around(int i, int j) const {
    const Grid& gr = *g;
    double s = 0.0;
    if (gr.dim == 1) {
      if (i > 0) s += cell(i - 1, 0);
      if (i < gr.n[0] - 1) s += cell(i, 0);
      return s;
    }
    for (int cj = j - 1; cj <= j; ++cj) {
      if (cj < 0 || cj > gr.n[1] - 2) continue;
      for (int ci = i - 1; ci <= i; ++ci) {
        if (ci < 0 || ci > gr.n[0] - 2) continue;
        s += cell(ci, cj);
      }
    }
    return s;
  }
};

}  // namespace

SolveResult minimize(const Functional& fn, const Field& boundary, const SolveOptions& opt) {
  const Grid& g = boundary.grid;
  if (!(fn.lambda > 0.0)) throw std::invalid_argument("minimize needs lambda > 0");
  for (int i = 0; i < g.node_count(); ++i)
    if (boundary.fixed[i] && boundary.v[i] < 0.0)
      throw std::invalid_argument("boundary data must be nonnegative");

  double scale = std::max(boundary.sup_abs(), 1e-30);
  // The indicator only pushes on nodes below eps, and the smeared profile
  // near the free boundary is a layer of width ~2*eps/slope. Keeping that
  // layer at least kLayerEps cells wide is what lets the boundary translate
  // smoothly; once eps drops below slope*h the boundary freezes where it
  // sits. The slope scale combines the data scale with the power-law
  // free-boundary slope (lambda* solving g(s)s - G(s) = lambda for G = t^p).
  double span = g.dim == 1 ? g.hi[0] - g.lo[0]
                           : std::min(g.hi[0] - g.lo[0], g.hi[1] - g.lo[1]);
  double pp = std::max(fn.phi.env.p, 1.1);
  double slope_scale =
      std::max(scale / span, std::pow(fn.lambda / (pp - 1.0), 1.0 / pp));
  constexpr double kLayerEps = 2.0;
  double eps0 = std::max(opt.eps0_rel * scale, opt.eps_min);

  // nested level stack, coarsest first; stop coarsening once the level's
  // eps floor would exceed eps0, since such a grid cannot resolve the
  // indicator layer at any eps the schedule will visit
  std::vector<Field> levels;
  levels.push_back(boundary);
  if (opt.multilevel) {
    while (true) {
      const Grid& lg = levels.back().grid;
      bool divisible = (lg.n[0] - 1) % 2 == 0 && (g.dim == 1 || (lg.n[1] - 1) % 2 == 0);
      int next = (lg.n[0] - 1) / 2 + 1;
      if (!divisible || next < opt.coarsest || next < 3) break;
      if (kLayerEps * slope_scale * lg.h[0] * 2.0 > eps0) break;
      levels.push_back(coarsen_nested(levels.back()));
    }
  }
  std::reverse(levels.begin(), levels.end());

  SolveResult res;

  Field u = levels.front();
  double eps_cur = eps0;
  double delta_cur = opt.delta0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    if (li > 0) {
      Field finer = levels[li];
      prolong_into(u, finer);
      u = std::move(finer);
    }
    BakedPhi baked(fn.phi, u.grid);
    bool finest = li + 1 == levels.size();
    // non-finest levels keep the layer comfortably resolved; the finest
    // level squeezes one octave further (marginal grip, short travel) since
    // the frozen boundary sits about eps/slope short of the sharp one
    double floor_eps = std::max(
        (finest ? 1.0 : kLayerEps) * slope_scale * u.grid.h[0], opt.eps_min);
    int cap = li == 0 ? opt.stages : std::max(opt.fine_stages, 2);
    // iterations on coarse levels are cheap and the boundary travels
    // farthest there, so scale the budget by relative node count
    long fine_work = levels.back().grid.node_count();
    long work = std::max<long>(1, u.grid.node_count());
    int budget = static_cast<int>(std::min<long>(
        60000, opt.max_inner * std::max<long>(1, fine_work / work)));
    for (int sub = 0; sub < cap; ++sub) {
      SmoothedProblem prob;
      prob.g = &u.grid;
      prob.baked = &baked;
      prob.lambda = fn.lambda;
      prob.eps = eps_cur;
      prob.delta = delta_cur;
      int iters = descend(prob, u, opt.gtol, budget);
      // The projected flow wedges into complementarity corners: the layer
      // toe ends up pressed against the dead-node bound lambda*h^2/(2*eps)
      // and the translation valley loses its first-order force, freezing
      // the free boundary a few cells short of the stage optimum. Restart
      // from truncated competitors max(u - sigma, 0) and keep the best
      // strict decrease of the stage energy; done once per level at the
      // eps floor, which is where the accumulated lag matters. The final
      // eps_min pass is exempt: its boundary is already placed.
      if (eps_cur <= floor_eps * (1.0 + 1e-12) &&
          eps_cur > opt.eps_min * (1.0 + 1e-12)) {
        std::vector<double> tmp(u.v.size());
        double Ecur = prob.energy_grad(u.v, tmp);
        std::vector<double> base = u.v;
        std::vector<double> best;
        double s_unit = slope_scale * u.grid.h[0];
        for (double mult : {1.0, 2.0, 4.0, 8.0}) {
          double sigma = mult * s_unit;
          for (int i = 0; i < u.grid.node_count(); ++i)
            u.v[i] = u.fixed[i] ? base[i] : std::max(base[i] - sigma, 0.0);
          iters += descend(prob, u, opt.gtol, std::min(budget, 4000));
          double Enew = prob.energy_grad(u.v, tmp);
          if (Enew < Ecur - 1e-13 * std::max(1.0, std::fabs(Ecur))) {
            Ecur = Enew;
            best = u.v;
          } else if (!best.empty() || mult > 2.0) {
            // the sweep is unimodal in sigma; stop once it turns uphill
            break;
          }
        }
        u.v = best.empty() ? std::move(base) : std::move(best);
      }
      StageLog log;
      log.level_n = u.grid.n[0];
      log.eps = prob.eps;
      log.delta = prob.delta;
      log.iterations = iters;
      std::vector<double> tmp(u.v.size());
      log.smoothed_energy = prob.energy_grad(u.v, tmp);
      log.exact_energy = energy(fn, u);
      res.stages.push_back(log);
      delta_cur = std::max(0.1 * delta_cur, opt.delta_min);
      if (eps_cur <= floor_eps * (1.0 + 1e-12)) {
        // finish with one pass at eps_min, where the indicator is
        // effectively sharp and dead nodes stay pinned
        if (finest && eps_cur > opt.eps_min * (1.0 + 1e-12)) {
          eps_cur = opt.eps_min;
          delta_cur = opt.delta_min;
          continue;
        }
        break;
      }
      eps_cur = std::max(0.5 * eps_cur, floor_eps);
    }
  }

  // stage 2: exact-energy polish on the finest level
  BakedPhi baked(fn.phi, u.grid);
  double E = energy(fn, u);
  const double smoothed_stage_exact = E;
  std::mt19937_64 rng(opt.seed);
  // one scan of the truncation shift grid; applies the best strict decrease
  auto truncation_scan = [&]() -> bool {
    double S = u.max_value();
    if (S <= 0.0) return false;
    double best_E = E;
    double best_s = -1.0;
    for (int k = 0; k < opt.truncation_count; ++k) {
      double f = static_cast<double>(k) / (opt.truncation_count - 1);
      double s = S * std::pow(10.0, -7.0 * (1.0 - f)) * 0.5;
      Field w = u;
      for (std::size_t i = 0; i < w.v.size(); ++i)
        if (!w.fixed[i]) w.v[i] = std::max(w.v[i] - s, 0.0);
      double Ew = energy(fn, w);
      if (Ew < best_E) {
        best_E = Ew;
        best_s = s;
      }
    }
    if (best_s < 0.0) return false;
    for (std::size_t i = 0; i < u.v.size(); ++i)
      if (!u.fixed[i]) u.v[i] = std::max(u.v[i] - best_s, 0.0);
    E = best_E;
    ++res.truncations_accepted;
    return true;
  };
  for (int round = 0; round < opt.polish_rounds; ++round) {
    bool improved = truncation_scan();
    // seeded random-order coordinate sweep with local exact energies
    LocalEnergy local{&u.grid, &baked, fn.lambda, positivity_threshold(u), &u.v};
    std::vector<int> order;
    for (int i = 0; i < u.grid.node_count(); ++i)
      if (!u.fixed[i]) order.push_back(i);
    std::shuffle(order.begin(), order.end(), rng);
    GradientField gr = gradient(u);
    CellField mag = gr.magnitude();
    double slope = 0.0;
    for (double m : mag.v) slope = std::max(slope, m);
    double hstep = std::max(slope, 1.0) * u.grid.h[0];
    int accepted = 0;
    for (int idx : order) {
      int i = idx % u.grid.n[0], j = idx / u.grid.n[0];
      double before = local.around(i, j);
      double v0 = u.v[idx];
      double cand[6] = {0.0, v0 + hstep, std::max(v0 - hstep, 0.0),
                        v0 + 0.25 * hstep, std::max(v0 - 0.25 * hstep, 0.0), v0};
      double best_v = v0, best_delta = -1e-14;
      for (double c : cand) {
        if (c == v0) continue;
        u.v[idx] = c;
        double delta = local.around(i, j) - before;
        if (delta < best_delta) {
          best_delta = delta;
          best_v = c;
        }
      }
      u.v[idx] = best_v;
      if (best_v != v0) ++accepted;
    }
    if (accepted > 0) {
      improved = true;
      res.polish_accepted += accepted;
      E = energy(fn, u);
    }
    if (!improved) break;
  }
  // leave no improving shift on the tested truncation grid
  for (int extra = 0; extra < 10 && truncation_scan(); ++extra) {
  }

  res.u = std::move(u);
  res.final_energy = E;
  // strict decrease bookkeeping: the polish never raises the exact energy
  res.converged = E <= smoothed_stage_exact + 1e-12 * std::max(1.0, std::fabs(E));
  return res;
}

}  // namespace acfb
