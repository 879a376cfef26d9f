#include "acfb/exact1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace acfb {

namespace {

// R(s) = s g(s) - G(s) is nondecreasing with R(0+) = 0, so the slope law
// R(s) = lambda has a unique root; bisection to near machine precision.
double slope_root(const PhiFunction& G, double lambda) {
  auto R = [&](double s) { return s * G.eval_deriv({0, 0}, s) - G.eval({0, 0}, s); };
  double hi = 1.0;
  int guard = 0;
  while (R(hi) < lambda && guard++ < 2000) hi *= 2.0;
  if (R(hi) < lambda) throw std::runtime_error("slope law has no root below overflow");
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (R(mid) < lambda)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// One-sided cone energy in the fraction w of the interval carrying the rise c:
// E(w) = w (G(c/w) + lambda). Convex in w; golden-section refinement around
// the slope-law optimum guards against flat spots.
double cone_energy(const PhiFunction& G, double lambda, double c, double w) {
  return w * (G.eval({0, 0}, c / w) + lambda);
}

double golden_min_w(const PhiFunction& G, double lambda, double c, double wlo, double whi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = wlo, b = whi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = cone_energy(G, lambda, c, x1), f2 = cone_energy(G, lambda, c, x2);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = cone_energy(G, lambda, c, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = cone_energy(G, lambda, c, x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double Exact1DSolution::eval(double x) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return a + (b - a) * x;
    case Kind::ConeRight: {
      double x0 = breakpoints[0];
      return x <= x0 ? 0.0 : b * (x - x0) / (1.0 - x0);
    }
    case Kind::ConeLeft: {
      double x0 = breakpoints[0];
      return x >= x0 ? 0.0 : a * (x0 - x) / x0;
    }
    case Kind::TwoSided: {
      double xl = breakpoints[0], xr = breakpoints[1];
      if (x <= xl) return a * (xl - x) / xl;
      if (x >= xr) return b * (x - xr) / (1.0 - xr);
      return 0.0;
    }
  }
  return 0.0;
}

Exact1DSolution solve_1d_exact(const PhiFunction& G, double lambda, double a, double b) {
  if (!G.autonomous()) throw std::invalid_argument("solve_1d_exact needs an autonomous G");
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("boundary values must be nonnegative");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

  Exact1DSolution best;
  best.a = a;
  best.b = b;
  best.lambda = lambda;
  best.energy = std::numeric_limits<double>::infinity();

  auto consider = [&](Exact1DSolution cand) {
    if (cand.energy < best.energy) best = cand;
  };

  if (a == 0.0 && b == 0.0) {
    Exact1DSolution z;
    z.a = a;
    z.b = b;
    z.lambda = lambda;
    z.kind = Exact1DSolution::Kind::Zero;
    z.energy = 0.0;
    return z;
  }

  double sstar = slope_root(G, lambda);
  double residual =
      std::fabs(sstar * G.eval_deriv({0, 0}, sstar) - G.eval({0, 0}, sstar) - lambda);

  {
    Exact1DSolution lin;
    lin.a = a;
    lin.b = b;
    lin.lambda = lambda;
    lin.kind = Exact1DSolution::Kind::Linear;
    lin.energy = G.eval({0, 0}, std::fabs(b - a)) + lambda;  // positive a.e. on (0,1)
    consider(lin);
  }

  if (a == 0.0 && b > 0.0 && b / sstar < 1.0) {
    double w = b / sstar;
    w = golden_min_w(G, lambda, b, std::max(1e-12, 0.5 * w), std::min(1.0, 2.0 * w));
    {
      Exact1DSolution cone;
      cone.a = a;
      cone.b = b;
      cone.lambda = lambda;
      cone.kind = Exact1DSolution::Kind::ConeRight;
      cone.energy = cone_energy(G, lambda, b, w);
      cone.lambda_star = b / w;
      cone.slope_residual = residual;
      cone.breakpoints = {1.0 - w};
      consider(cone);
    }
  }
  if (b == 0.0 && a > 0.0 && a / sstar < 1.0) {
    double w = a / sstar;
    w = golden_min_w(G, lambda, a, std::max(1e-12, 0.5 * w), std::min(1.0, 2.0 * w));
    {
      Exact1DSolution cone;
      cone.a = a;
      cone.b = b;
      cone.lambda = lambda;
      cone.kind = Exact1DSolution::Kind::ConeLeft;
      cone.energy = cone_energy(G, lambda, a, w);
      cone.lambda_star = a / w;
      cone.slope_residual = residual;
      cone.breakpoints = {w};
      consider(cone);
    }
  }
  if (a > 0.0 && b > 0.0) {
    double wl = a / sstar, wr = b / sstar;
    if (wl + wr < 1.0) {
      Exact1DSolution two;
      two.a = a;
      two.b = b;
      two.lambda = lambda;
      two.kind = Exact1DSolution::Kind::TwoSided;
      two.energy = cone_energy(G, lambda, a, wl) + cone_energy(G, lambda, b, wr);
      two.lambda_star = sstar;
      two.slope_residual = residual;
      two.breakpoints = {wl, 1.0 - wr};
      consider(two);
    }
  }

  if (best.kind != Exact1DSolution::Kind::Linear) {
    best.slope_residual = residual;
    if (best.lambda_star == 0.0) best.lambda_star = sstar;
  }
  return best;
}

}  // namespace acfb
