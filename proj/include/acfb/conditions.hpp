#pragma once

#include <string>
#include <vector>

#include "acfb/phi.hpp"

namespace acfb {

// Result of a structural check. worst is the largest relative violation seen;
// the verdict passes when worst <= rtol. where identifies the worst sample.
struct ConditionVerdict {
  bool pass = true;
  double worst = 0.0;
  std::string where;
};

inline constexpr double kConditionRtol = 1e-9;

// phi(x,t)/t^p nondecreasing in t, sampled per node on tgrid.
ConditionVerdict check_inc(const PhiFunction& phi, const Grid& g, double p,
                           std::vector<double> tgrid = {}, double rtol = kConditionRtol);

// phi(x,t)/t^q nonincreasing in t.
ConditionVerdict check_dec(const PhiFunction& phi, const Grid& g, double q,
                           std::vector<double> tgrid = {}, double rtol = kConditionRtol);

// 1/L <= phi(x,1) <= L at every sampled node.
ConditionVerdict check_A0(const PhiFunction& phi, const Grid& g, double L,
                          double rtol = kConditionRtol);

// Vanishing-oscillation check over the given balls: with lo/hi the ball
// envelopes, hi(t) <= (1 + omega(r)) lo(t) for every t with
// lo(t) in [omega(r), 1/|B_r|]. Verdict only, no hard failure.
ConditionVerdict check_VA1(const PhiFunction& phi, const Grid& g, const OmegaModulus& omega,
                           const std::vector<Ball>& balls, std::vector<double> tgrid = {},
                           double rtol = kConditionRtol);

// Consistency of the declared envelope:
//   p phi(x,t) <= t phi_t(x,t) <= q phi(x,t)
//   phi(x,s) min(t^p,t^q) <= phi(x,ts) <= max(t^p,t^q) phi(x,s)
ConditionVerdict check_sandwich(const PhiFunction& phi, const Grid& g,
                                double rtol = kConditionRtol);

}  // namespace acfb
