#pragma once

#include <vector>

#include "acfb/estimates.hpp"
#include "acfb/recession.hpp"

namespace acfb {

// Blow-up sequence v_j(x) = u(x0 + r_j x)/(sigma_j r_j) on a fixed probe grid
// over [-1,1]^d, with r_j = 2^-j and sigma_j = max(1, S_{j+1}/r_j) where
// S_{j+1} is the sup of u over the closed ball of radius r_j/2.
struct BlowupRun {
  Vec2 x0;
  Grid probe;
  std::vector<double> r, sigma;
  std::vector<double> weight;  // lambda / phi(x0, sigma_j), should decrease
  std::vector<double> phi_r;   // phi(x0, sigma_j) * r_j, monitored toward 0
  std::vector<Field> v;
  Field v_limit;
  PhiFunction phi_inf;  // recession limit anchored at x0
  std::vector<double> el_residual;     // per j, against phi_inf
  std::vector<double> sup_increment;   // |v_{j+1}-v_j| sup on the unit ball
  EstimateReport report;
};

// The Euler-Lagrange residual is the sup over hat bumps at probe nodes whose
// touching cells are entirely positive of the energy gradient of
// sum |cell| phi_inf(|grad v|). j truncates when 2^-j < 4h or the sampled box
// leaves the domain.
BlowupRun blowup_run(const Functional& fn, const Field& u, Vec2 x0, int j_max,
                     int probe_n = 33);

}  // namespace acfb
