#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acfb/functional.hpp"
#include "acfb/regularize.hpp"
#include "acfb/replacement.hpp"

namespace acfb {

// Absolute tolerance on fitted log-log slopes.
inline constexpr double kFitTol = 0.05;

struct EstimateRow {
  std::string key;
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = true;
  std::string note;
};

struct EstimateReport {
  std::string name;
  std::string family;
  double h = 0.0;
  double lambda = 0.0;
  std::vector<EstimateRow> rows;
  double fitted_exponent = 0.0;
  double fit_residual = 0.0;
  bool has_fit = false;
  bool pass = true;
};

// All ball means below use midpoint quadrature over the cells whose center
// lies in the ball; u at a cell is the mean of its corner values.

// LHS = mean_{B_r} phi(x,|grad u|), RHS = mean_{B_2r} phi(x,|u-mean|/(2r)) + lambda,
// one row per ball; the balls passed in are the outer balls B_2r.
EstimateReport caccioppoli_ratio(const Functional& fn, const Field& u,
                                 const std::vector<Ball>& outer_balls);

// LHS = (mean_{B_r} phi^{1+s0})^{1/(1+s0)}, RHS = (mean_{B_2r} phi^t)^{1/t} + lambda+1.
// Throws if the gradient modular on any outer ball exceeds 1.
EstimateReport reverse_holder(const Functional& fn, const Field& u,
                              const std::vector<Ball>& outer_balls, double s0 = 0.1,
                              double t = 1.0);

// Largest dyadic r0 with r0 <= 1/2, omega(2 r0) <= 1/L, and
// |B_{2r0}| <= min{ 1/(2L), 2^{-2(1+s0)/s0} I^{-(2+s0)/s0} } where I is the
// modular of phi(x,|grad u|)^{1+s0} over the region cells. Floors at 2^-60.
double small_radius(const Functional& fn, const Field& u, const std::vector<int>& region_cells,
                    double s0 = 0.1, std::string* warning = nullptr);

// v_r = harmonic replacement on B_r; LHS = mean_{B_r}|grad u - grad v_r|,
// RHS = (omega(2r)^{p/(2q^2)} + r^{min{beta,gamma}/(2q)}) (mean_{B_2r}|grad u| + lambda+1),
// gamma = min{1, d s0^2/(4(2+s0))}. Requires r <= r0 with region B_{2r}.
EstimateReport comparison_estimate(const Functional& fn, const Field& u,
                                   const std::vector<Ball>& balls, double beta = 1.0,
                                   double s0 = 0.1, const RegularizeOptions& ropt = {},
                                   const ReplaceOptions& sopt = {});

// Tabulates mean_{B_rho}|grad u| and fits log mean vs log rho; passes when the
// slope is >= -sigma - kFitTol. Needs at least 3 radii.
EstimateReport morrey_decay(const Field& u, Vec2 center, const std::vector<double>& radii,
                            double sigma);

// Max over node pairs in the region of |u(x)-u(y)| / |x-y|^alpha. Exhaustive
// when the pair count fits the budget, otherwise seeded stratified sampling.
double holder_seminorm(const Field& u, double alpha, const Ball& region,
                       long long pair_budget = 2000000, std::uint64_t seed = 0x5EEDULL);

// Excess E(rho) = mean_{B_rho}|grad u - mean grad u| at rho in {tau*r} for all
// radii r and fractions tau; fitted slope must be >= alpha_min - kFitTol.
// Every ball must sit strictly inside the positivity set.
EstimateReport gradient_excess_decay(const Field& u, Vec2 center,
                                     const std::vector<double>& radii,
                                     const std::vector<double>& taus, double alpha_min);

// Nodes with u <= tau_pos that have a 4-neighbor with u > tau_pos.
std::vector<int> free_boundary_points(const Field& u);

// S_k = sup over the closed ball B_{2^-k}(x0) of u for k = 0..k_max; reports
// the smallest C with S_k <= C M 2^-k and the per-k dichotomy
// S_{k+1} <= max{C M 2^-(k+1), S_k / 2}. k_max truncates when 2^-k < 2h.
EstimateReport growth_dichotomy(const Field& u, Vec2 x0, int k_max, double M = 1.0);

// Max cell |grad u| over the region at two resolutions of the same problem;
// passes when the fine-grid value grows by at most lip_tol relative.
EstimateReport lipschitz_certificate(const Field& u_h, const Field& u_h2, const Ball& region,
                                     double lip_tol = 0.10);

// Hardy-Littlewood maximal function over dyadic radii {2h, 4h, ..., <= R_max},
// means taken over cells with center in the (domain-clipped) ball.
CellField maximal_function(const CellField& f, double R_max);

// LHS = mean_{B_r} phi(x,|u-mean|/(2r)), RHS = (mean_{B_r} phi(x,|grad u|)^{1/s})^s + 1.
// Throws if the gradient modular on any ball exceeds 1.
EstimateReport poincare_check(const Functional& fn, const Field& u,
                              const std::vector<Ball>& balls, double s = 1.0);

}  // namespace acfb
