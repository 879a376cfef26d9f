#pragma once

#include "acfb/grid.hpp"
#include "acfb/regularize.hpp"

namespace acfb {

struct ReplaceOptions {
  double delta0 = 1e-2;   // modulus smoothing start
  double delta_min = 1e-8;
  double gtol = 1e-8;     // relative sup-norm residual target
  int max_outer = 40;     // lagged-diffusivity iterations per delta stage
  int max_cg = 6000;
  double cg_rtol = 1e-11;
};

struct ReplaceStats {
  int outer_iterations = 0;
  int cg_iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Minimizes sum over cells of |cell| * phi~(|grad w|) over the non-fixed
// nodes of `data`; fixed nodes keep their values.
Field dirichlet_solve(const RegularizedPhi& reg, const Field& data,
                      const ReplaceOptions& opt = {}, ReplaceStats* stats = nullptr);

// phi~-harmonic replacement of u in the open ball b: nodes strictly inside b
// relax, every other node keeps the value of u.
Field harmonic_replacement(const RegularizedPhi& reg, const Field& u, const Ball& b,
                           const ReplaceOptions& opt = {}, ReplaceStats* stats = nullptr);

}  // namespace acfb
