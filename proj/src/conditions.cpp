#include "acfb/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace acfb {

namespace {

// Sampled node list; strides down to ~2k nodes so checks stay fast on fine grids.
std::vector<int> sample_nodes(const Grid& g) {
  int stride = 1;
  while (g.node_count() / (g.dim == 2 ? stride * stride : stride) > 2048) ++stride;
  std::vector<int> out;
  for (int j = 0; j < g.n[1]; j += (g.dim == 2 ? stride : 1))
    for (int i = 0; i < g.n[0]; i += stride) out.push_back(g.node_index(i, j));
  // border extremes matter for coefficient ranges; make sure corners are in
  out.push_back(g.node_index(g.n[0] - 1, g.n[1] - 1));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string describe_sample(Vec2 x, double t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "x=(%.6g,%.6g) t=%.6g", x.x1, x.x2, t);
  return buf;
}

void record(ConditionVerdict& v, double violation, Vec2 x, double t) {
  if (violation > v.worst) {
    v.worst = violation;
    v.where = describe_sample(x, t);
  }
}

}  // namespace

ConditionVerdict check_inc(const PhiFunction& phi, const Grid& g, double p,
                           std::vector<double> tgrid, double rtol) {
  if (tgrid.empty()) tgrid = default_tgrid();
  ConditionVerdict v;
  for (int idx : sample_nodes(g)) {
    Vec2 x = g.node(idx);
    double prev = phi.eval(x, tgrid[0]) / std::pow(tgrid[0], p);
    for (std::size_t k = 1; k < tgrid.size(); ++k) {
      double cur = phi.eval(x, tgrid[k]) / std::pow(tgrid[k], p);
      if (cur < prev) record(v, (prev - cur) / std::max(prev, 1e-300), x, tgrid[k]);
      prev = cur;
    }
  }
  v.pass = v.worst <= rtol;
  return v;
}

ConditionVerdict check_dec(const PhiFunction& phi, const Grid& g, double q,
                           std::vector<double> tgrid, double rtol) {
  if (tgrid.empty()) tgrid = default_tgrid();
  ConditionVerdict v;
  for (int idx : sample_nodes(g)) {
    Vec2 x = g.node(idx);
    double prev = phi.eval(x, tgrid[0]) / std::pow(tgrid[0], q);
    for (std::size_t k = 1; k < tgrid.size(); ++k) {
      double cur = phi.eval(x, tgrid[k]) / std::pow(tgrid[k], q);
      if (cur > prev) record(v, (cur - prev) / std::max(prev, 1e-300), x, tgrid[k]);
      prev = cur;
    }
  }
  v.pass = v.worst <= rtol;
  return v;
}

ConditionVerdict check_A0(const PhiFunction& phi, const Grid& g, double L, double rtol) {
  ConditionVerdict v;
  for (int idx : sample_nodes(g)) {
    Vec2 x = g.node(idx);
    double val = phi.eval(x, 1.0);
    if (val * L < 1.0) record(v, 1.0 / (val * L) - 1.0, x, 1.0);
    if (val > L) record(v, val / L - 1.0, x, 1.0);
  }
  v.pass = v.worst <= rtol;
  return v;
}

ConditionVerdict check_VA1(const PhiFunction& phi, const Grid& g, const OmegaModulus& omega,
                           const std::vector<Ball>& balls, std::vector<double> tgrid,
                           double rtol) {
  if (tgrid.empty()) tgrid = default_tgrid();
  ConditionVerdict v;
  for (const Ball& b : balls) {
    BallEnvelope env = ball_envelope(phi, g, b, tgrid);
    double w = omega(b.radius);
    double cap = 1.0 / ball_measure(g.dim, b.radius);
    for (std::size_t k = 0; k < tgrid.size(); ++k) {
      if (env.lo[k] < w || env.lo[k] > cap) continue;
      double bound = (1.0 + w) * env.lo[k];
      if (env.hi[k] > bound)
        record(v, env.hi[k] / bound - 1.0, b.center, tgrid[k]);
    }
  }
  v.pass = v.worst <= rtol;
  return v;
}

ConditionVerdict check_sandwich(const PhiFunction& phi, const Grid& g, double rtol) {
  ConditionVerdict v;
  const double p = phi.env.p, q = phi.env.q;
  std::vector<int> nodes = sample_nodes(g);
  // derivative bracket p phi <= t phi_t <= q phi
  std::vector<double> tgrid = default_tgrid();
  for (int idx : nodes) {
    Vec2 x = g.node(idx);
    for (double t : tgrid) {
      double f = phi.eval(x, t);
      double df = phi.eval_deriv(x, t);
      if (t * df < p * f) record(v, (p * f - t * df) / std::max(p * f, 1e-300), x, t);
      if (t * df > q * f) record(v, (t * df - q * f) / std::max(q * f, 1e-300), x, t);
    }
  }
  // scaling bracket phi(x,s) min(t^p,t^q) <= phi(x,ts) <= max(t^p,t^q) phi(x,s)
  std::vector<double> sgrid = log_spaced(1e-2, 1e2, 17);
  std::vector<double> fgrid = log_spaced(1e-2, 1e2, 17);
  for (int idx : nodes) {
    Vec2 x = g.node(idx);
    for (double s : sgrid) {
      double base = phi.eval(x, s);
      for (double t : fgrid) {
        double scaled = phi.eval(x, t * s);
        double lo = base * std::min(std::pow(t, p), std::pow(t, q));
        double hi = base * std::max(std::pow(t, p), std::pow(t, q));
        if (scaled < lo) record(v, (lo - scaled) / std::max(lo, 1e-300), x, t * s);
        if (scaled > hi) record(v, (scaled - hi) / std::max(hi, 1e-300), x, t * s);
      }
    }
  }
  v.pass = v.worst <= rtol;
  return v;
}

}  // namespace acfb
