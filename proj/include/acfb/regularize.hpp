#pragma once

#include <vector>

#include "acfb/phi.hpp"

namespace acfb {

// Autonomous regularization of phi on a ball: the lower envelope of the
// derivative over the doubled ball, mollified by a geometric mean in log t,
// then integrated back. Stored as a log-log table; pure powers are detected
// and evaluated in closed form.
//
// Invariants checked at construction (fails loudly if violated):
//   log-log slopes of the table lie in [p, q] (and [p-1, q-1] for the
//   derivative, which also brackets t phi''/phi'), and phi_reg(1) stays
//   within the structural (A0) bracket widened by the kernel width.
struct RegularizedPhi {
  Ball ball;
  double p = 2.0, q = 2.0;
  double c_cmp = 0.0;  // max over samples of phi_reg(t) / (phi(x,t) + 1)
  std::vector<double> logt;          // uniform log10 grid
  std::vector<double> logphi, logdphi;
  bool power_law = false;            // constant slope table
  double power_exponent = 0.0, power_coeff = 0.0;

  double eval(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;
  // d log phi_reg' / d log t at t, the quantity bracketed by [p-1, q-1].
  double dslope(double t) const;
};

struct RegularizeOptions {
  double table_tmin = 1e-6;
  double table_tmax = 1e6;
  int points_per_decade = 40;
  double kernel_halfwidth_decades = 0.25;
  double slope_tol = 1e-3;
};

RegularizedPhi regularize(const PhiFunction& phi, const Grid& g, const Ball& b,
                          const RegularizeOptions& opt = {});

}  // namespace acfb
