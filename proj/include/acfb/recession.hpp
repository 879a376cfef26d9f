#pragma once

#include <vector>

#include "acfb/phi.hpp"

namespace acfb {

// Rescaled integrand phi_j(x,t) = phi(x0 + r_j x, sigma_j t) / phi(x0, sigma_j).
// Normalized so phi_j(0,1) = 1 when evaluated at the anchor.
struct BlowupPhi {
  const PhiFunction* base = nullptr;
  Vec2 anchor;
  double r_j = 1.0;
  double sigma_j = 1.0;
  double norm = 1.0;  // phi(x0, sigma_j)

  double eval(Vec2 x, double t) const;
  double eval_deriv(Vec2 x, double t) const;
};

BlowupPhi blowup_phi(const PhiFunction& phi, Vec2 anchor, double r_j, double sigma_j);

// Recession iterates phibar_j(t) = phi(x0, t sigma_j) / phi(x0, sigma_j) on a
// t grid, with sup-norm Cauchy increments and shape checks of the limit.
struct RecessionReport {
  std::vector<double> tgrid;
  std::vector<double> sigmas;
  std::vector<std::vector<double>> iterates;
  std::vector<double> sup_increments;  // size sigmas.size()-1
  bool convex = true;       // nonnegative second divided differences
  bool slopes_ok = true;    // log-log slopes of the limit within [p,q]
  PhiFunction limit;        // tabulated final iterate, envelope copied
};

RecessionReport recession_limit(const PhiFunction& phi, const std::vector<double>& sigmas,
                                std::vector<double> tgrid = {}, Vec2 anchor = {0.0, 0.0});

// Default sigma sequence 2^1 .. 2^40.
std::vector<double> default_sigmas(int jmax = 40);

}  // namespace acfb
