#pragma once

#include <cstdint>
#include <vector>

#include "acfb/functional.hpp"

namespace acfb {

struct SolveOptions {
  // chi continuation: eps starts at eps0_rel*scale and halves, flooring at
  // 0.5*slope_scale*h per refinement level before the grid is refined. The
  // indicator only pushes on nodes below eps, so eps must track the cell
  // size: once eps < slope*h no positive node feels it and the free
  // boundary freezes wherever it sits.
  double eps0_rel = 0.1;
  double eps_min = 1e-6;
  double delta0 = 1e-2;
  double delta_min = 1e-8;
  int stages = 7;

  double gtol = 1e-8;      // relative energy decrease cutoff per stage
  int max_inner = 2000;     // descent iterations per stage
  bool multilevel = true;  // coarse-to-fine continuation on nested grids
  int coarsest = 17;       // coarsest node count per axis
  int fine_stages = 4;     // stages rerun on refined levels

  int polish_rounds = 3;
  int truncation_count = 25;
  std::uint64_t seed = 0x5EED;
};

struct StageLog {
  int level_n = 0;
  double eps = 0.0, delta = 0.0;
  int iterations = 0;
  double smoothed_energy = 0.0;
  double exact_energy = 0.0;
};

struct SolveResult {
  Field u;
  bool converged = false;
  double final_energy = 0.0;
  std::vector<StageLog> stages;
  int polish_accepted = 0;
  int truncations_accepted = 0;
};

// Discrete minimization of energy(fn, .) over fields that match `boundary`
// on its fixed mask and stay nonnegative. Interior values of `boundary`
// seed the iteration. Stage 1 relaxes the positivity indicator to
// min(v/eps, 1) and the modulus to sqrt(|g|^2 + delta^2) and runs projected
// descent with a backtracking line search (monotone within each stage);
// stage 2 polishes the exact energy with coordinate moves and the
// truncation family max(u - s, 0), accepting only strict decreases.
SolveResult minimize(const Functional& fn, const Field& boundary, const SolveOptions& opt = {});

}  // namespace acfb
