#include "acfb/blowup.hpp"

#include <algorithm>
#include <cmath>
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

// Energy gradient of sum |cell| phi_inf(|grad v|) at nodes whose touching
// cells are all strictly positive; elsewhere the chi term is active and the
// equation does not hold.
double el_residual(const PhiFunction& phi_inf, const Field& v) {
  const Grid& g = v.grid;
  int n0 = g.n[0];
  int ncx = g.cells(0), ncy = g.dim == 2 ? g.cells(1) : 1;
  double h1 = g.h[0], h2 = g.dim == 2 ? g.h[1] : 1.0;
  double measure = g.cell_measure();
  double tau = positivity_threshold(v);
  const double delta = 1e-10;  // guards phi'(m)/m on flat cells

  std::vector<double> grad(v.v.size(), 0.0);
  std::vector<char> cell_pos(static_cast<std::size_t>(ncx) * ncy, 0);
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < ncx; ++ci) {
      int a = ci + n0 * cj;
      bool pos;
      double gx = (v.v[a + 1] - v.v[a]) / h1;
      double gy = 0.0;
      if (g.dim == 1) {
        pos = v.v[a] > tau && v.v[a + 1] > tau;
      } else {
        gy = (v.v[a + n0] - v.v[a]) / h2;
        pos = v.v[a] > tau && v.v[a + 1] > tau && v.v[a + n0] > tau && v.v[a + n0 + 1] > tau;
      }
      cell_pos[ci + ncx * cj] = pos;
      double m = std::sqrt(gx * gx + gy * gy + delta * delta);
      double w = phi_inf.eval_deriv({0.0, 0.0}, m) / m;
      grad[a + 1] += measure * w * gx / h1;
      grad[a] -= measure * w * gx / h1;
      if (g.dim == 2) {
        grad[a + n0] += measure * w * gy / h2;
        grad[a] -= measure * w * gy / h2;
      }
    }
  }
  double res = 0.0;
  for (int j = 0; j < g.n[1]; ++j) {
    for (int i = 0; i < g.n[0]; ++i) {
      if (g.on_border(i, j)) continue;
      bool all_pos = true;
      for (int cj = (g.dim == 2 ? j - 1 : 0); cj <= (g.dim == 2 ? j : 0) && all_pos; ++cj)
        for (int ci = i - 1; ci <= i && all_pos; ++ci)
          all_pos = cell_pos[ci + ncx * cj];
      if (all_pos) res = std::max(res, std::fabs(grad[g.node_index(i, j)]));
    }
  }
  return res;
}

}  // namespace

BlowupRun blowup_run(const Functional& fn, const Field& u, Vec2 x0, int j_max, int probe_n) {
  const Grid& g = u.grid;
  if (j_max < 1) throw std::invalid_argument("blowup_run: j_max must be >= 1");
  double margin = std::min(std::min(x0.x1 - g.lo[0], g.hi[0] - x0.x1),
                           g.dim == 2 ? std::min(x0.x2 - g.lo[1], g.hi[1] - x0.x2) : 1e300);
  if (margin <= 0.0) throw std::invalid_argument("blowup_run: x0 must be interior");

  BlowupRun run;
  run.x0 = x0;
  run.probe = g.dim == 1 ? Grid::line(-1.0, 1.0, probe_n)
                         : Grid::box(-1.0, 1.0, -1.0, 1.0, probe_n, probe_n);

  bool truncated = false;
  std::vector<int> js;
  for (int j = 1; j <= j_max; ++j) {
    double rj = std::ldexp(1.0, -j);
    if (rj > margin) continue;  // sampled box would leave the domain
    if (rj < 4.0 * g.h[0]) {
      truncated = true;
      break;
    }
    js.push_back(j);
  }
  if (js.empty()) throw std::runtime_error("blowup_run: no admissible radius r_j");

  run.report.name = "blowup";
  run.report.family = family_name(fn.phi.family);
  run.report.h = g.h[0];
  run.report.lambda = fn.lambda;

  run.phi_inf = recession_limit(fn.phi, default_sigmas(), {}, x0).limit;

  std::vector<int> unit_ball_nodes = nodes_in_closed_ball(run.probe, {{0.0, 0.0}, 1.0});
  for (std::size_t step = 0; step < js.size(); ++step) {
    int j = js[step];
    double rj = std::ldexp(1.0, -j);
    double S_next = 0.0;
    for (int idx : nodes_in_closed_ball(g, {x0, 0.5 * rj}))
      S_next = std::max(S_next, u.v[idx]);
    double sigma = std::max(1.0, S_next / rj);

    Field vj = Field::zeros(run.probe);
    for (int idx = 0; idx < run.probe.node_count(); ++idx) {
      Vec2 xi = run.probe.node(idx);
      Vec2 x = {x0.x1 + rj * xi.x1, g.dim == 2 ? x0.x2 + rj * xi.x2 : 0.0};
      vj.v[idx] = interpolate(u, x) / (sigma * rj);
    }

    double norm = fn.phi.eval(x0, sigma);
    run.r.push_back(rj);
    run.sigma.push_back(sigma);
    run.weight.push_back(fn.lambda / norm);
    run.phi_r.push_back(norm * rj);
    run.el_residual.push_back(el_residual(run.phi_inf, vj));
    if (!run.v.empty()) {
      double inc = 0.0;
      const Field& prev = run.v.back();
      for (int idx : unit_ball_nodes) inc = std::max(inc, std::fabs(vj.v[idx] - prev.v[idx]));
      run.sup_increment.push_back(inc);
    }
    run.v.push_back(std::move(vj));
  }
  run.v_limit = run.v.back();

  for (std::size_t k = 0; k < run.r.size(); ++k) {
    EstimateRow row;
    row.key = "j=" + std::to_string(js[k]);
    row.r = run.r[k];
    row.lhs = run.el_residual[k];
    row.rhs = run.weight[k];
    row.ratio = k > 0 ? run.sup_increment[k - 1] : 0.0;
    row.note = "sigma=" + fmt(run.sigma[k]) + ";phir=" + fmt(run.phi_r[k]);
    if (truncated && k == 0) row.note += ";j truncated by grid resolution";
    row.pass = std::isfinite(row.lhs) && std::isfinite(row.ratio);
    if (k > 0) row.pass = row.pass && run.weight[k] <= run.weight[k - 1] * (1.0 + 1e-12);
    run.report.pass = run.report.pass && row.pass;
    run.report.rows.push_back(row);
  }
  return run;
}

}  // namespace acfb
