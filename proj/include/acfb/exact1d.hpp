#pragma once

#include <vector>

#include "acfb/phi.hpp"

namespace acfb {

// Continuum minimizer on [0,1] of  int G(|u'|) + lambda |{u > 0}|  with
// u(0) = a, u(1) = b, u >= 0, for an autonomous convex G. The minimizer is
// piecewise linear with at most one dead interval; the candidate classes are
// enumerated exactly. Free-boundary slopes solve s g(s) - G(s) = lambda.
struct Exact1DSolution {
  enum class Kind { Zero, Linear, ConeLeft, ConeRight, TwoSided };

  double a = 0.0, b = 0.0, lambda = 0.0;
  Kind kind = Kind::Zero;
  double energy = 0.0;
  double lambda_star = 0.0;     // free-boundary slope when a dead set exists
  double slope_residual = 0.0;  // |s g(s) - G(s) - lambda| at lambda_star
  std::vector<double> breakpoints;  // interior endpoints of the dead interval

  double eval(double x) const;
};

Exact1DSolution solve_1d_exact(const PhiFunction& G, double lambda, double a, double b);

}  // namespace acfb
