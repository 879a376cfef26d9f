#include "acfb/phi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acfb {

double OmegaModulus::operator()(double r) const {
  if (r <= 0.0) return 0.0;
  return std::min(1.0, C * std::pow(r, theta));
}

Coefficient Coefficient::constant(double v) {
  Coefficient c;
  c.is_const = true;
  c.value = v;
  return c;
}

Coefficient Coefficient::expression(const std::string& src) {
  Coefficient c;
  c.is_const = false;
  c.expr = Expr::parse(src);
  return c;
}

std::string Coefficient::describe() const {
  if (is_const) return std::to_string(value);
  return expr.source();
}

const char* family_name(PhiFamily f) {
  switch (f) {
    case PhiFamily::PowerLaw: return "power_law";
    case PhiFamily::PerturbedOrlicz: return "perturbed_orlicz";
    case PhiFamily::VariableExponent: return "variable_exponent";
    case PhiFamily::DoublePhase: return "double_phase";
    case PhiFamily::Tabulated: return "tabulated";
  }
  return "?";
}

namespace {
// t^e with exact fast paths for the small integers that dominate the cells.
inline double pow_e(double t, double e) {
  if (e == 2.0) return t * t;
  if (e == 3.0) return t * t * t;
  if (e == 1.0) return t;
  return std::pow(t, e);
}
}  // namespace

bool PhiFunction::autonomous() const {
  switch (family) {
    case PhiFamily::PowerLaw:
    case PhiFamily::Tabulated: return true;
    case PhiFamily::PerturbedOrlicz:
    case PhiFamily::DoublePhase: return a.is_const;
    case PhiFamily::VariableExponent: return pvar.is_const;
  }
  return true;
}

double PhiFunction::eval(Vec2 x, double t) const {
  if (t < 0.0) throw std::domain_error("phi expects t >= 0");
  if (t == 0.0) return 0.0;
  switch (family) {
    case PhiFamily::PowerLaw: return pow_e(t, p);
    case PhiFamily::PerturbedOrlicz: return a(x) * pow_e(t, p);
    case PhiFamily::VariableExponent: return std::pow(t, pvar(x));
    case PhiFamily::DoublePhase: return pow_e(t, p) + a(x) * pow_e(t, q);
    case PhiFamily::Tabulated: return std::pow(10.0, tab_eval_log(std::log10(t)));
  }
  return 0.0;
}

double PhiFunction::eval_deriv(Vec2 x, double t) const {
  if (t < 0.0) throw std::domain_error("phi expects t >= 0");
  if (t == 0.0) return 0.0;
  switch (family) {
    case PhiFamily::PowerLaw: return p * pow_e(t, p - 1.0);
    case PhiFamily::PerturbedOrlicz: return a(x) * p * pow_e(t, p - 1.0);
    case PhiFamily::VariableExponent: {
      double px = pvar(x);
      return px * std::pow(t, px - 1.0);
    }
    case PhiFamily::DoublePhase: return p * pow_e(t, p - 1.0) + a(x) * q * pow_e(t, q - 1.0);
    case PhiFamily::Tabulated: {
      double lt = std::log10(t);
      return std::pow(10.0, tab_eval_log(lt)) * tab_slope(lt) / t;
    }
  }
  return 0.0;
}

double PhiFunction::tab_eval_log(double logt) const {
  const auto& lt = tab_logt;
  const auto& lv = tab_logv;
  std::size_t m = lt.size();
  if (logt <= lt.front()) return lv.front() + tab_slope(logt) * (logt - lt.front());
  if (logt >= lt.back()) return lv.back() + tab_slope(logt) * (logt - lt.back());
  auto it = std::upper_bound(lt.begin(), lt.end(), logt);
  std::size_t k = static_cast<std::size_t>(it - lt.begin());
  k = std::min(std::max<std::size_t>(k, 1), m - 1);
  double f = (logt - lt[k - 1]) / (lt[k] - lt[k - 1]);
  return (1.0 - f) * lv[k - 1] + f * lv[k];
}

double PhiFunction::tab_slope(double logt) const {
  const auto& lt = tab_logt;
  const auto& lv = tab_logv;
  std::size_t m = lt.size();
  auto clamped = [&](double s) { return std::clamp(s, env.p, env.q); };
  if (logt <= lt.front()) return clamped((lv[1] - lv[0]) / (lt[1] - lt[0]));
  if (logt >= lt.back()) return clamped((lv[m - 1] - lv[m - 2]) / (lt[m - 1] - lt[m - 2]));
  auto it = std::upper_bound(lt.begin(), lt.end(), logt);
  std::size_t k = static_cast<std::size_t>(it - lt.begin());
  k = std::min(std::max<std::size_t>(k, 1), m - 1);
  return (lv[k] - lv[k - 1]) / (lt[k] - lt[k - 1]);
}

PhiFunction PhiFunction::power_law(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("power_law needs p > 1");
  PhiFunction f;
  f.family = PhiFamily::PowerLaw;
  f.p = f.q = p;
  f.env = {p, p, 1.0, {0.0, 1.0}};
  return f;
}

PhiFunction PhiFunction::perturbed_orlicz(double p, Coefficient a, GrowthEnvelope env) {
  if (!(p > 1.0)) throw std::invalid_argument("perturbed_orlicz needs p > 1");
  PhiFunction f;
  f.family = PhiFamily::PerturbedOrlicz;
  f.p = f.q = p;
  f.a = std::move(a);
  f.env = env;
  return f;
}

PhiFunction PhiFunction::variable_exponent(Coefficient pfun, GrowthEnvelope env) {
  PhiFunction f;
  f.family = PhiFamily::VariableExponent;
  f.pvar = std::move(pfun);
  f.p = env.p;
  f.q = env.q;
  f.env = env;
  return f;
}

PhiFunction PhiFunction::double_phase(double p, double q, Coefficient a, GrowthEnvelope env) {
  if (!(p > 1.0) || !(q >= p)) throw std::invalid_argument("double_phase needs 1 < p <= q");
  PhiFunction f;
  f.family = PhiFamily::DoublePhase;
  f.p = p;
  f.q = q;
  f.a = std::move(a);
  f.env = env;
  return f;
}

PhiFunction PhiFunction::tabulated(const std::vector<double>& t, const std::vector<double>& v,
                                   GrowthEnvelope env) {
  if (t.size() != v.size() || t.size() < 2)
    throw std::invalid_argument("tabulated needs matching t/value lists, length >= 2");
  PhiFunction f;
  f.family = PhiFamily::Tabulated;
  f.p = env.p;
  f.q = env.q;
  f.env = env;
  f.tab_logt.reserve(t.size());
  f.tab_logv.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(v[i] > 0.0))
      throw std::invalid_argument("tabulated needs positive samples");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw std::invalid_argument("tabulated t samples must increase");
    if (i > 0 && !(v[i] > v[i - 1]))
      throw std::invalid_argument("tabulated values must increase");
    f.tab_logt.push_back(std::log10(t[i]));
    f.tab_logv.push_back(std::log10(v[i]));
  }
  return f;
}

std::vector<double> log_spaced(double tmin, double tmax, int count) {
  if (!(tmin > 0.0) || !(tmax > tmin) || count < 2)
    throw std::invalid_argument("bad log spacing request");
  std::vector<double> out(count);
  double a = std::log10(tmin), b = std::log10(tmax);
  for (int i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
  return out;
}

std::vector<double> default_tgrid() { return log_spaced(1e-4, 1e4, 64); }

BallEnvelope ball_envelope(const PhiFunction& phi, const Grid& g, const Ball& b,
                           const std::vector<double>& tgrid) {
  BallNodes bn = ball_nodes(g, b);
  BallEnvelope env;
  env.ball = b;
  env.t = tgrid;
  env.lo.assign(tgrid.size(), 0.0);
  env.hi.assign(tgrid.size(), 0.0);
  for (std::size_t k = 0; k < tgrid.size(); ++k) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int idx : bn.interior) {
      double val = phi.eval(g.node(idx), tgrid[k]);
      if (first) {
        lo = hi = val;
        first = false;
      } else {
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
    }
    env.lo[k] = lo;
    env.hi[k] = hi;
  }
  return env;
}

}  // namespace acfb
