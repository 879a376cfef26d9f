#pragma once

#include <string>
#include <vector>

#include "acfb/expr.hpp"
#include "acfb/geometry.hpp"
#include "acfb/grid.hpp"

namespace acfb {

// Concave modulus omega(r) = min(1, C r^theta) controlling the allowed
// oscillation of phi(.,t) over balls of radius r.
struct OmegaModulus {
  double C = 1.0;
  double theta = 1.0;  // in (0,1]

  double operator()(double r) const;
};

// Declared growth data of an integrand: phi(x,t)/t^p nondecreasing,
// phi(x,t)/t^q nonincreasing, 1/L <= phi(x,1) <= L.
struct GrowthEnvelope {
  double p = 2.0;  // > 1
  double q = 2.0;  // >= p
  double L = 1.0;  // >= 1
  OmegaModulus omega;
};

// Spatial coefficient: either a constant or a compiled expression in x1, x2.
struct Coefficient {
  bool is_const = true;
  double value = 0.0;
  Expr expr;

  Coefficient() = default;
  static Coefficient constant(double v);
  static Coefficient expression(const std::string& src);

  double operator()(Vec2 x) const { return is_const ? value : expr.eval(x.x1, x.x2); }
  std::string describe() const;
};

enum class PhiFamily { PowerLaw, PerturbedOrlicz, VariableExponent, DoublePhase, Tabulated };

const char* family_name(PhiFamily f);

// An Orlicz integrand phi(x,t), t >= 0, from one of the supported families:
//   PowerLaw          t^p
//   PerturbedOrlicz   a(x) t^p
//   VariableExponent  t^p(x)
//   DoublePhase       t^p + a(x) t^q
//   Tabulated         autonomous table, log-log interpolation, power tails
// eval_deriv is the partial derivative in t and returns 0 at t = 0.
class PhiFunction {
 public:
  PhiFamily family = PhiFamily::PowerLaw;
  double p = 2.0;
  double q = 2.0;
  Coefficient a;     // DoublePhase / PerturbedOrlicz coefficient
  Coefficient pvar;  // VariableExponent exponent field
  std::vector<double> tab_logt, tab_logv;  // Tabulated, log10 scale
  GrowthEnvelope env;

  double eval(Vec2 x, double t) const;
  double eval_deriv(Vec2 x, double t) const;
  bool autonomous() const;

  static PhiFunction power_law(double p);
  static PhiFunction perturbed_orlicz(double p, Coefficient a, GrowthEnvelope env);
  static PhiFunction variable_exponent(Coefficient pfun, GrowthEnvelope env);
  static PhiFunction double_phase(double p, double q, Coefficient a, GrowthEnvelope env);
  // t must be positive increasing, v positive increasing; tails extrapolate
  // with the boundary log-log slopes clamped to [p,q].
  static PhiFunction tabulated(const std::vector<double>& t, const std::vector<double>& v,
                               GrowthEnvelope env);

 private:
  double tab_eval_log(double logt) const;
  double tab_slope(double logt) const;
};

// Pointwise envelopes over the nodes of a ball: lo(t) = min phi(x,t),
// hi(t) = max phi(x,t), sampled on tgrid.
struct BallEnvelope {
  Ball ball;
  std::vector<double> t, lo, hi;
};

BallEnvelope ball_envelope(const PhiFunction& phi, const Grid& g, const Ball& b,
                           const std::vector<double>& tgrid);

// 64 log-spaced points spanning [1e-4, 1e4].
std::vector<double> default_tgrid();
std::vector<double> log_spaced(double tmin, double tmax, int count);

}  // namespace acfb
