#include "acfb/almost_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "acfb/regularize.hpp"
#include "acfb/replacement.hpp"

namespace acfb {

namespace {

constexpr double kRatioSlack = 1e-9;

double safe_ratio(double fu, double fw) {
  if (fw <= 0.0) return fu <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return fu / fw;
}

}  // namespace

AlmostMinCert check_almost_min(const Functional& fn, const Field& u, double kappa, double beta,
                               const std::vector<Ball>& balls, const CompetitorSpec& spec) {
  AlmostMinCert cert;
  cert.kappa = kappa;
  cert.beta = beta;
  cert.balls = balls;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (const Ball& b : balls) {
    BallNodes bn = ball_nodes(u.grid, b);
    std::vector<int> movable;
    for (int idx : bn.interior)
      if (!u.fixed[idx]) movable.push_back(idx);
    double fu = energy_on_cells(fn, u, bn.cells);
    double bound = 1.0 + kappa * std::pow(b.radius, beta);

    double local_sup = 0.0;
    for (int idx : bn.interior) local_sup = std::max(local_sup, u.v[idx]);

    auto push = [&](const std::string& name, const Field& w) {
      CompetitorRow row;
      row.competitor = name;
      row.ball = b;
      row.energy_u = fu;
      row.energy_w = energy_on_cells(fn, w, bn.cells);
      row.ratio = safe_ratio(row.energy_u, row.energy_w);
      row.bound = bound;
      row.pass = row.ratio <= bound * (1.0 + kRatioSlack);
      cert.worst_ratio = std::max(cert.worst_ratio, row.ratio);
      cert.pass = cert.pass && row.pass;
      cert.rows.push_back(row);
    };

    if (spec.replacement) {
      RegularizedPhi reg = regularize(fn.phi, u.grid, b);
      Field w = harmonic_replacement(reg, u, b);
      for (double& x : w.v) x = std::max(x, 0.0);
      push("replacement", w);
    }
    if (spec.truncations && local_sup > 0.0) {
      for (double f : {1e-4, 1e-2, 0.1, 0.25, 0.5}) {
        double s = f * local_sup;
        Field w = u;
        for (int idx : movable) w.v[idx] = std::max(w.v[idx] - s, 0.0);
        push("truncate_" + std::to_string(f), w);
      }
    }
    if (spec.mollify) {
      Field w = u;
      const Grid& g = u.grid;
      for (int idx : movable) {
        int i = idx % g.n[0], j = idx / g.n[0];
        double s = 0.0;
        int cnt = 0;
        if (i > 0) { s += u.v[idx - 1]; ++cnt; }
        if (i < g.n[0] - 1) { s += u.v[idx + 1]; ++cnt; }
        if (g.dim == 2 && j > 0) { s += u.v[idx - g.n[0]]; ++cnt; }
        if (g.dim == 2 && j < g.n[1] - 1) { s += u.v[idx + g.n[0]]; ++cnt; }
        if (cnt > 0) w.v[idx] = std::max(s / cnt, 0.0);
      }
      push("mollify", w);
    }
    if (spec.random) {
      double amp = spec.random_amplitude_rel * std::max(local_sup, u.sup_abs() * 1e-3);
      for (int k = 0; k < spec.random_count; ++k) {
        Field w = u;
        for (int idx : movable) w.v[idx] = std::max(w.v[idx] + amp * unit(rng), 0.0);
        push("random_" + std::to_string(k), w);
      }
    }
  }
  return cert;
}

}  // namespace acfb
