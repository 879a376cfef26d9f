#include "acfb/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace acfb {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Per-cell data shared by the ball means: gradient magnitude, phi(x_c, .),
// and the corner mean of u (the midpoint value of the bilinear interpolant).
struct CellData {
  const Grid* g;
  BakedPhi baked;
  std::vector<double> gx, gy, mag, ucell;

  CellData(const Functional& fn, const Field& u) : g(&u.grid), baked(fn.phi, u.grid) {
    build(u);
  }
  explicit CellData(const Field& u) : g(&u.grid) { build(u); }

  void build(const Field& u) {
    GradientField gr = gradient(u);
    gx = gr.gx;
    gy = gr.gy;
    int nc = g->cell_count();
    mag.resize(nc);
    ucell.resize(nc);
    int n0 = g->n[0];
    int ncx = n0 - 1;
    for (int c = 0; c < nc; ++c) {
      double gyv = g->dim == 2 ? gy[c] : 0.0;
      mag[c] = std::sqrt(gx[c] * gx[c] + gyv * gyv);
      if (g->dim == 1) {
        ucell[c] = 0.5 * (u.v[c] + u.v[c + 1]);
      } else {
        int a = (c % ncx) + n0 * (c / ncx);
        ucell[c] = 0.25 * (u.v[a] + u.v[a + 1] + u.v[a + n0] + u.v[a + n0 + 1]);
      }
    }
  }

  Vec2 center(int c) const {
    int ncx = g->n[0] - 1;
    return g->dim == 1 ? g->cell_center(c, 0) : g->cell_center(c % ncx, c / ncx);
  }
};

std::vector<int> ball_cells(const Grid& g, const Ball& b) {
  std::vector<int> cells = cells_with_center_in(g, b);
  if (cells.empty()) throw std::runtime_error("degenerate ball: no cell centers inside");
  return cells;
}

template <typename F>
double cell_mean(const std::vector<int>& cells, F&& f) {
  double s = 0.0;
  for (int c : cells) s += f(c);
  return s / static_cast<double>(cells.size());
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = static_cast<int>(x.size());
  if (f.points < 2) return f;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < f.points; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= f.points;
  my /= f.points;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < f.points; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < f.points; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / f.points);
  return f;
}

EstimateReport make_report(const std::string& name, const Field& u, const Functional* fn) {
  EstimateReport rep;
  rep.name = name;
  rep.h = u.grid.h[0];
  if (fn) {
    rep.family = family_name(fn->phi.family);
    rep.lambda = fn->lambda;
  }
  return rep;
}

}  // namespace

EstimateReport caccioppoli_ratio(const Functional& fn, const Field& u,
                                 const std::vector<Ball>& outer_balls) {
  EstimateReport rep = make_report("caccioppoli", u, &fn);
  CellData cd(fn, u);
  for (std::size_t bi = 0; bi < outer_balls.size(); ++bi) {
    const Ball& outer = outer_balls[bi];
    Ball inner = outer.scaled(0.5);
    std::vector<int> oc = ball_cells(u.grid, outer);
    std::vector<int> ic = ball_cells(u.grid, inner);
    double lhs = cell_mean(ic, [&](int c) { return cd.baked.eval(c, cd.mag[c]); });
    double ubar = cell_mean(oc, [&](int c) { return cd.ucell[c]; });
    double rhs =
        cell_mean(oc, [&](int c) {
          return cd.baked.eval(c, std::fabs(cd.ucell[c] - ubar) / outer.radius);
        }) +
        fn.lambda;
    EstimateRow row;
    row.key = "ball" + std::to_string(bi);
    row.r = outer.radius;
    row.lhs = lhs;
    row.rhs = rhs;
    row.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    row.pass = std::isfinite(row.ratio);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

EstimateReport reverse_holder(const Functional& fn, const Field& u,
                              const std::vector<Ball>& outer_balls, double s0, double t) {
  if (!(s0 > 0.0) || !(t > 0.0))
    throw std::invalid_argument("reverse_holder: s0 and t must be positive");
  EstimateReport rep = make_report("reverse_holder", u, &fn);
  CellData cd(fn, u);
  double measure = u.grid.cell_measure();
  for (std::size_t bi = 0; bi < outer_balls.size(); ++bi) {
    const Ball& outer = outer_balls[bi];
    std::vector<int> oc = ball_cells(u.grid, outer);
    double modular = 0.0;
    for (int c : oc) modular += cd.baked.eval(c, cd.mag[c]);
    modular *= measure;
    if (modular > 1.0)
      throw std::runtime_error("reverse_holder: gradient modular " + fmt(modular) +
                               " exceeds 1 on ball " + std::to_string(bi));
    std::vector<int> ic = ball_cells(u.grid, outer.scaled(0.5));
    double lhs = std::pow(
        cell_mean(ic, [&](int c) { return std::pow(cd.baked.eval(c, cd.mag[c]), 1.0 + s0); }),
        1.0 / (1.0 + s0));
    double rhs = std::pow(
                     cell_mean(oc, [&](int c) { return std::pow(cd.baked.eval(c, cd.mag[c]), t); }),
                     1.0 / t) +
                 fn.lambda + 1.0;
    EstimateRow row;
    row.key = "ball" + std::to_string(bi);
    row.r = outer.radius;
    row.lhs = lhs;
    row.rhs = rhs;
    row.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    row.note = "modular=" + fmt(modular);
    row.pass = std::isfinite(row.ratio);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

double small_radius(const Functional& fn, const Field& u, const std::vector<int>& region_cells,
                    double s0, std::string* warning) {
  if (!(s0 > 0.0)) throw std::invalid_argument("small_radius: s0 must be positive");
  CellData cd(fn, u);
  double measure = u.grid.cell_measure();
  double modular = 0.0;
  for (int c : region_cells) modular += std::pow(cd.baked.eval(c, cd.mag[c]), 1.0 + s0);
  modular *= measure;

  const GrowthEnvelope& env = fn.phi.env;
  double cap = 1.0 / (2.0 * env.L);
  if (modular > 0.0) {
    double mbound =
        std::pow(2.0, -2.0 * (1.0 + s0) / s0) * std::pow(modular, -(2.0 + s0) / s0);
    cap = std::min(cap, mbound);
  }
  for (int k = 1; k <= 60; ++k) {
    double r0 = std::ldexp(1.0, -k);
    if (env.omega(2.0 * r0) > 1.0 / env.L) continue;
    if (ball_measure(u.grid.dim, 2.0 * r0) > cap) continue;
    return r0;
  }
  if (warning) *warning = "small_radius hit the 2^-60 floor (modular=" + fmt(modular) + ")";
  return std::ldexp(1.0, -60);
}

EstimateReport comparison_estimate(const Functional& fn, const Field& u,
                                   const std::vector<Ball>& balls, double beta, double s0,
                                   const RegularizeOptions& ropt, const ReplaceOptions& sopt) {
  EstimateReport rep = make_report("comparison", u, &fn);
  const GrowthEnvelope& env = fn.phi.env;
  double gamma = std::min(1.0, u.grid.dim * s0 * s0 / (4.0 * (2.0 + s0)));
  CellData cd(fn, u);
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    const Ball& b = balls[bi];
    double r = b.radius;
    Ball outer = b.scaled(2.0);
    std::vector<int> oc = ball_cells(u.grid, outer);
    double r0 = small_radius(fn, u, oc, s0);
    if (r > r0)
      throw std::runtime_error("comparison_estimate: ball radius " + fmt(r) +
                               " exceeds the small-radius bound r0=" + fmt(r0));
    RegularizedPhi reg = regularize(fn.phi, u.grid, b, ropt);
    ReplaceStats st;
    Field v = harmonic_replacement(reg, u, b, sopt, &st);
    if (!st.converged)
      throw std::runtime_error("comparison_estimate: replacement solve did not converge");
    GradientField gv = gradient(v);
    std::vector<int> ic = ball_cells(u.grid, b);
    double lhs = cell_mean(ic, [&](int c) {
      double dx = cd.gx[c] - gv.gx[c];
      double dy = u.grid.dim == 2 ? cd.gy[c] - gv.gy[c] : 0.0;
      return std::sqrt(dx * dx + dy * dy);
    });
    double eta = std::pow(env.omega(2.0 * r), env.p / (2.0 * env.q * env.q)) +
                 std::pow(r, std::min(beta, gamma) / (2.0 * env.q));
    double rhs = eta * (cell_mean(oc, [&](int c) { return cd.mag[c]; }) + fn.lambda + 1.0);
    EstimateRow row;
    row.key = "ball" + std::to_string(bi);
    row.r = r;
    row.lhs = lhs;
    row.rhs = rhs;
    row.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    row.note = "r0=" + fmt(r0) + ";eta=" + fmt(eta);
    row.pass = std::isfinite(row.ratio);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

EstimateReport morrey_decay(const Field& u, Vec2 center, const std::vector<double>& radii,
                            double sigma) {
  if (radii.size() < 3) throw std::invalid_argument("morrey_decay needs at least 3 radii");
  EstimateReport rep = make_report("morrey", u, nullptr);
  CellData cd(u);
  std::vector<double> lx, ly;
  for (double rho : radii) {
    std::vector<int> cells = ball_cells(u.grid, {center, rho});
    double mean = cell_mean(cells, [&](int c) { return cd.mag[c]; });
    EstimateRow row;
    row.key = "rho=" + fmt(rho);
    row.r = rho;
    row.lhs = mean;
    row.rhs = 0.0;
    row.ratio = mean;
    if (mean > 0.0) {
      lx.push_back(std::log(rho));
      ly.push_back(std::log(mean));
    } else {
      row.note = "zero mean, excluded from fit";
    }
    rep.rows.push_back(row);
  }
  if (lx.size() >= 2) {
    LineFit f = fit_line(lx, ly);
    rep.fitted_exponent = f.slope;
    rep.fit_residual = f.residual;
    rep.has_fit = true;
    rep.pass = f.slope >= -sigma - kFitTol;
  } else {
    // all means vanish: no decay to contradict
    rep.pass = true;
  }
  return rep;
}

double holder_seminorm(const Field& u, double alpha, const Ball& region, long long pair_budget,
                       std::uint64_t seed) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("holder_seminorm: alpha must be in (0,1]");
  const Grid& g = u.grid;
  std::vector<int> nodes;
  for (int idx = 0; idx < g.node_count(); ++idx)
    if (dist(g.node(idx), region.center) < region.radius) nodes.push_back(idx);
  long long m = static_cast<long long>(nodes.size());
  if (m < 2) return 0.0;
  double best = 0.0;
  auto probe = [&](int a, int b) {
    double dd = dist(g.node(nodes[a]), g.node(nodes[b]));
    if (dd <= 0.0) return;
    double s = std::fabs(u.v[nodes[a]] - u.v[nodes[b]]) / std::pow(dd, alpha);
    best = std::max(best, s);
  };
  if (m * (m - 1) / 2 <= pair_budget) {
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) probe(a, b);
    return best;
  }
  // stratified sampling: half arbitrary pairs, half short-range pairs where
  // the alpha-quotient typically peaks
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long long> pick(0, m - 1);
  long long half = pair_budget / 2;
  for (long long k = 0; k < half; ++k) {
    long long a = pick(rng), b = pick(rng);
    if (a != b) probe(static_cast<int>(a), static_cast<int>(b));
  }
  std::uniform_int_distribution<int> off(-4, 4);
  for (long long k = 0; k < pair_budget - half; ++k) {
    long long a = pick(rng);
    int ia = nodes[a] % g.n[0], ja = nodes[a] / g.n[0];
    int ib = ia + off(rng);
    int jb = g.dim == 2 ? ja + off(rng) : ja;
    if (ib < 0 || ib >= g.n[0] || jb < 0 || jb >= g.n[1]) continue;
    int idx = g.node_index(ib, jb);
    if (idx == nodes[a]) continue;
    if (dist(g.node(idx), region.center) >= region.radius) continue;
    double dd = dist(g.node(nodes[a]), g.node(idx));
    double s = std::fabs(u.v[nodes[a]] - u.v[idx]) / std::pow(dd, alpha);
    best = std::max(best, s);
  }
  return best;
}

EstimateReport gradient_excess_decay(const Field& u, Vec2 center,
                                     const std::vector<double>& radii,
                                     const std::vector<double>& taus, double alpha_min) {
  EstimateReport rep = make_report("gradient_excess", u, nullptr);
  CellData cd(u);
  double tau_pos = positivity_threshold(u);
  double gscale = 0.0;
  for (double msq : cd.mag) gscale = std::max(gscale, msq);
  double floor = 1e-13 * std::max(1.0, gscale);

  std::vector<double> rhos;
  for (double r : radii)
    for (double t : taus) rhos.push_back(t * r);
  std::sort(rhos.begin(), rhos.end());
  rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());

  std::vector<double> lx, ly;
  for (double rho : rhos) {
    for (int idx : nodes_in_closed_ball(u.grid, {center, rho}))
      if (u.v[idx] <= tau_pos)
        throw std::runtime_error("gradient_excess_decay: ball rho=" + fmt(rho) +
                                 " touches the free boundary");
    std::vector<int> cells = ball_cells(u.grid, {center, rho});
    double mx = cell_mean(cells, [&](int c) { return cd.gx[c]; });
    double my = u.grid.dim == 2 ? cell_mean(cells, [&](int c) { return cd.gy[c]; }) : 0.0;
    double excess = cell_mean(cells, [&](int c) {
      double dx = cd.gx[c] - mx;
      double dy = u.grid.dim == 2 ? cd.gy[c] - my : 0.0;
      return std::sqrt(dx * dx + dy * dy);
    });
    EstimateRow row;
    row.key = "rho=" + fmt(rho);
    row.r = rho;
    row.lhs = excess;
    row.ratio = excess;
    if (excess > floor) {
      lx.push_back(std::log(rho));
      ly.push_back(std::log(excess));
    } else {
      row.note = "excess below floor";
    }
    rep.rows.push_back(row);
  }
  if (lx.size() >= 2) {
    LineFit f = fit_line(lx, ly);
    rep.fitted_exponent = f.slope;
    rep.fit_residual = f.residual;
    rep.has_fit = true;
    rep.pass = f.slope >= alpha_min - kFitTol;
  } else {
    rep.pass = true;  // excess identically below floor
  }
  return rep;
}

std::vector<int> free_boundary_points(const Field& u) {
  const Grid& g = u.grid;
  double tau = positivity_threshold(u);
  std::vector<int> pts;
  for (int j = 0; j < g.n[1]; ++j) {
    for (int i = 0; i < g.n[0]; ++i) {
      int idx = g.node_index(i, j);
      if (u.v[idx] > tau) continue;
      bool positive_neighbor =
          (i > 0 && u.v[idx - 1] > tau) || (i < g.n[0] - 1 && u.v[idx + 1] > tau) ||
          (g.dim == 2 && j > 0 && u.v[idx - g.n[0]] > tau) ||
          (g.dim == 2 && j < g.n[1] - 1 && u.v[idx + g.n[0]] > tau);
      if (positive_neighbor) pts.push_back(idx);
    }
  }
  return pts;
}

EstimateReport growth_dichotomy(const Field& u, Vec2 x0, int k_max, double M) {
  EstimateReport rep = make_report("growth_dichotomy", u, nullptr);
  const Grid& g = u.grid;
  int k_used = k_max;
  for (int k = 0; k <= k_max; ++k) {
    if (std::ldexp(1.0, -k) < 2.0 * g.h[0]) {
      k_used = k - 1;
      break;
    }
  }
  if (k_used < 1) throw std::runtime_error("growth_dichotomy: radius underflows the grid");
  std::string trunc_note =
      k_used < k_max ? "k_max truncated to " + std::to_string(k_used) : std::string();

  std::vector<double> S(k_used + 1, 0.0);
  for (int k = 0; k <= k_used; ++k) {
    double rk = std::ldexp(1.0, -k);
    for (int idx : nodes_in_closed_ball(g, {x0, rk})) S[k] = std::max(S[k], u.v[idx]);
  }
  double C = 0.0;
  for (int k = 0; k <= k_used; ++k) C = std::max(C, S[k] / (M * std::ldexp(1.0, -k)));
  for (int k = 0; k + 1 <= k_used; ++k) {
    double r_next = std::ldexp(1.0, -(k + 1));
    EstimateRow row;
    row.key = "k=" + std::to_string(k);
    row.r = r_next;
    row.lhs = S[k + 1];
    row.rhs = std::max(C * M * r_next, 0.5 * S[k]);
    row.ratio = S[k] > 0.0 ? S[k + 1] / S[k] : 0.0;
    row.pass = row.lhs <= row.rhs * (1.0 + 1e-12);
    if (!trunc_note.empty() && k == 0) row.note = trunc_note;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  rep.fitted_exponent = C;
  rep.has_fit = true;
  return rep;
}

EstimateReport lipschitz_certificate(const Field& u_h, const Field& u_h2, const Ball& region,
                                     double lip_tol) {
  EstimateReport rep = make_report("lipschitz", u_h, nullptr);
  auto region_max = [&](const Field& u) {
    CellData cd(u);
    std::vector<int> cells = ball_cells(u.grid, region);
    double m = 0.0;
    for (int c : cells) m = std::max(m, cd.mag[c]);
    return m;
  };
  double coarse = region_max(u_h);
  double fine = region_max(u_h2);
  EstimateRow row;
  row.key = "maxgrad";
  row.r = region.radius;
  row.lhs = coarse;
  row.rhs = fine;
  row.ratio = coarse > 0.0 ? fine / coarse : (fine > 0.0 ? std::numeric_limits<double>::infinity()
                                                         : 1.0);
  row.pass = row.ratio <= 1.0 + lip_tol;
  row.note = "h=" + fmt(u_h.grid.h[0]) + ";h2=" + fmt(u_h2.grid.h[0]);
  rep.rows.push_back(row);
  rep.pass = row.pass;
  return rep;
}

CellField maximal_function(const CellField& f, double R_max) {
  const Grid& g = f.grid;
  double h1 = g.h[0], h2 = g.dim == 2 ? g.h[1] : 0.0;
  std::vector<double> radii;
  for (double rho = 2.0 * h1; rho <= R_max * (1.0 + 1e-12); rho *= 2.0) radii.push_back(rho);
  if (radii.empty()) radii.push_back(2.0 * h1);

  // translation-invariant offset rings between consecutive dyadic radii
  int ncx = g.cells(0), ncy = g.dim == 2 ? g.cells(1) : 1;
  double rmax = radii.back();
  int wx = static_cast<int>(rmax / h1) + 1;
  int wy = g.dim == 2 ? static_cast<int>(rmax / h2) + 1 : 0;
  std::vector<std::vector<std::pair<int, int>>> rings(radii.size());
  for (int dj = -wy; dj <= wy; ++dj) {
    for (int di = -wx; di <= wx; ++di) {
      double dd = std::sqrt(di * h1 * di * h1 + (g.dim == 2 ? dj * h2 * dj * h2 : 0.0));
      for (std::size_t k = 0; k < radii.size(); ++k) {
        if (dd < radii[k]) {
          rings[k].push_back({di, dj});
          break;
        }
      }
    }
  }

  CellField out;
  out.grid = g;
  out.v.assign(f.v.size(), 0.0);
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < ncx; ++ci) {
      double sum = 0.0;
      long long count = 0;
      double best = 0.0;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        for (const auto& [di, dj] : rings[k]) {
          int i = ci + di, j = cj + dj;
          if (i < 0 || i >= ncx || j < 0 || j >= ncy) continue;
          sum += std::fabs(f.v[i + ncx * j]);
          ++count;
        }
        if (count > 0) best = std::max(best, sum / static_cast<double>(count));
      }
      out.v[ci + ncx * cj] = best;
    }
  }
  return out;
}

EstimateReport poincare_check(const Functional& fn, const Field& u,
                              const std::vector<Ball>& balls, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("poincare_check: s must be positive");
  EstimateReport rep = make_report("poincare", u, &fn);
  CellData cd(fn, u);
  double measure = u.grid.cell_measure();
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    const Ball& b = balls[bi];
    std::vector<int> cells = ball_cells(u.grid, b);
    double modular = 0.0;
    for (int c : cells) modular += cd.baked.eval(c, cd.mag[c]);
    modular *= measure;
    if (modular > 1.0)
      throw std::runtime_error("poincare_check: gradient modular " + fmt(modular) +
                               " exceeds 1 on ball " + std::to_string(bi));
    double ubar = cell_mean(cells, [&](int c) { return cd.ucell[c]; });
    double lhs = cell_mean(cells, [&](int c) {
      return cd.baked.eval(c, std::fabs(cd.ucell[c] - ubar) / (2.0 * b.radius));
    });
    double rhs = std::pow(cell_mean(cells, [&](int c) {
                            return std::pow(cd.baked.eval(c, cd.mag[c]), 1.0 / s);
                          }),
                          s) +
                 1.0;
    EstimateRow row;
    row.key = "ball" + std::to_string(bi);
    row.r = b.radius;
    row.lhs = lhs;
    row.rhs = rhs;
    row.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    row.pass = std::isfinite(row.ratio);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace acfb
