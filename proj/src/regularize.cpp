#include "acfb/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace acfb {

namespace {

constexpr double kLn10 = 2.302585092994046;

double table_lookup(const std::vector<double>& logt, const std::vector<double>& logv, double lt) {
  std::size_t m = logt.size();
  double step = logt[1] - logt[0];
  if (lt <= logt.front()) {
    double s = (logv[1] - logv[0]) / step;
    return logv.front() + s * (lt - logt.front());
  }
  if (lt >= logt.back()) {
    double s = (logv[m - 1] - logv[m - 2]) / step;
    return logv.back() + s * (lt - logt.back());
  }
  double pos = (lt - logt.front()) / step;
  std::size_t k = std::min(static_cast<std::size_t>(pos), m - 2);
  double f = pos - k;
  return (1.0 - f) * logv[k] + f * logv[k + 1];
}

}  // namespace

double RegularizedPhi::eval(double t) const {
  if (t < 0.0) throw std::domain_error("regularized phi expects t >= 0");
  if (t == 0.0) return 0.0;
  if (power_law) return power_coeff * std::pow(t, power_exponent);
  return std::pow(10.0, table_lookup(logt, logphi, std::log10(t)));
}

double RegularizedPhi::deriv(double t) const {
  if (t < 0.0) throw std::domain_error("regularized phi expects t >= 0");
  if (t == 0.0) return 0.0;
  if (power_law) return power_coeff * power_exponent * std::pow(t, power_exponent - 1.0);
  return std::pow(10.0, table_lookup(logt, logdphi, std::log10(t)));
}

double RegularizedPhi::dslope(double t) const {
  if (power_law) return power_exponent - 1.0;
  double lt = std::log10(t);
  double step = logt[1] - logt[0];
  return (table_lookup(logt, logdphi, lt + 0.5 * step) -
          table_lookup(logt, logdphi, lt - 0.5 * step)) / step;
}

double RegularizedPhi::deriv2(double t) const {
  if (t <= 0.0) return 0.0;
  return deriv(t) * dslope(t) / t;
}

RegularizedPhi regularize(const PhiFunction& phi, const Grid& g, const Ball& b,
                          const RegularizeOptions& opt) {
  const double p = phi.env.p, q = phi.env.q, L = phi.env.L;
  Ball doubled = b.scaled(2.0);
  BallNodes bn = ball_nodes(g, doubled);  // throws on degenerate balls

  // table in log10 t
  int decades = static_cast<int>(std::round(std::log10(opt.table_tmax / opt.table_tmin)));
  int m = decades * opt.points_per_decade + 1;
  double step = 1.0 / opt.points_per_decade;
  std::vector<double> logt(m);
  double lt0 = std::log10(opt.table_tmin);
  for (int i = 0; i < m; ++i) logt[i] = lt0 + i * step;

  // lower envelope of the derivative over the doubled ball; the pointwise min
  // keeps the slope bracket [p-1, q-1] that each family satisfies
  std::vector<double> lg(m);
  for (int i = 0; i < m; ++i) {
    double t = std::pow(10.0, logt[i]);
    double lo = 0.0;
    bool first = true;
    for (int idx : bn.interior) {
      double d = phi.eval_deriv(g.node(idx), t);
      if (first || d < lo) {
        lo = d;
        first = false;
      }
    }
    if (!(lo > 0.0))
      throw std::runtime_error("regularize: derivative envelope not positive at t=" +
                               std::to_string(t));
    lg[i] = std::log10(lo);
  }

  // geometric-mean mollification: convolve log g with a Hann kernel of
  // half-width 0.25 decades; pad with the end slopes
  int kw = static_cast<int>(std::round(opt.kernel_halfwidth_decades / step));
  std::vector<double> kernel(2 * kw + 1);
  double ksum = 0.0;
  for (int k = -kw; k <= kw; ++k) {
    double c = std::cos(0.5 * M_PI * k / (kw + 1));
    kernel[k + kw] = c * c;
    ksum += c * c;
  }
  for (double& w : kernel) w /= ksum;
  double slope_lo = (lg[1] - lg[0]) / step;
  double slope_hi = (lg[m - 1] - lg[m - 2]) / step;
  auto lg_ext = [&](int i) {
    if (i < 0) return lg[0] + slope_lo * (i * step);
    if (i >= m) return lg[m - 1] + slope_hi * ((i - m + 1) * step);
    return lg[i];
  };
  std::vector<double> lgs(m);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int k = -kw; k <= kw; ++k) acc += kernel[k + kw] * lg_ext(i + k);
    lgs[i] = acc;
  }

  // integrate the mollified derivative assuming a local power on each
  // interval; exact for pure powers, so power inputs stay powers
  std::vector<double> lphi(m);
  double s0 = (lgs[1] - lgs[0]) / step;  // log-log slope near the low end
  double g0 = std::pow(10.0, lgs[0]);
  double t_first = std::pow(10.0, logt[0]);
  double acc = t_first * g0 / (s0 + 1.0);  // integral of the power tail below the table
  lphi[0] = std::log10(acc);
  for (int i = 1; i < m; ++i) {
    double sl = (lgs[i] - lgs[i - 1]) / step;
    double gi = std::pow(10.0, lgs[i - 1]);
    double ti = std::pow(10.0, logt[i - 1]);
    double ratio = std::pow(10.0, step);  // t_{i}/t_{i-1}
    acc += gi * ti * (std::pow(ratio, sl + 1.0) - 1.0) / (sl + 1.0);
    lphi[i] = std::log10(acc);
  }

  RegularizedPhi out;
  out.ball = b;
  out.p = p;
  out.q = q;
  out.logt = std::move(logt);
  out.logphi = std::move(lphi);
  out.logdphi = std::move(lgs);

  // pure-power detection enables the closed-form fast path
  bool pure = true;
  double first_slope = (out.logdphi[1] - out.logdphi[0]) / step;
  for (int i = 1; i < m && pure; ++i)
    pure = std::fabs((out.logdphi[i] - out.logdphi[i - 1]) / step - first_slope) < 1e-11;
  if (pure) {
    out.power_law = true;
    out.power_exponent = first_slope + 1.0;
    // phi_reg(1) from the table fixes the coefficient
    out.power_coeff = std::pow(10.0, table_lookup(out.logt, out.logphi, 0.0));
  }

  // a posteriori invariant verification on the table
  const double tol = opt.slope_tol;
  for (int i = 1; i < m; ++i) {
    double sphi = (out.logphi[i] - out.logphi[i - 1]) / step;
    double sd = (out.logdphi[i] - out.logdphi[i - 1]) / step;
    if (sphi < p - tol || sphi > q + tol)
      throw std::runtime_error("regularize: table slope " + std::to_string(sphi) +
                               " outside [p,q]");
    if (sd < p - 1.0 - tol || sd > q - 1.0 + tol)
      throw std::runtime_error("regularize: derivative slope " + std::to_string(sd) +
                               " outside [p-1,q-1]");
  }
  // (A0) bracket widened by the kernel width: the mollified value at 1 sits
  // between envelope values at 10^{-w} and 10^{w}
  double widen = std::pow(10.0, opt.kernel_halfwidth_decades * q);
  double at1 = out.eval(1.0);
  if (at1 * L * q * widen < 1.0 - tol || at1 > L * widen * (1.0 + tol))
    throw std::runtime_error("regularize: phi_reg(1)=" + std::to_string(at1) +
                             " violates the (A0) bracket");

  // comparison constant against phi + 1, sampled on the doubled ball
  double c_cmp = 0.0;
  std::vector<double> tsample = log_spaced(1e-4, 1e4, 33);
  std::size_t node_stride = std::max<std::size_t>(1, bn.interior.size() / 64);
  for (double t : tsample) {
    double reg = out.eval(t);
    for (std::size_t k = 0; k < bn.interior.size(); k += node_stride) {
      double base = phi.eval(g.node(bn.interior[k]), t);
      c_cmp = std::max(c_cmp, reg / (base + 1.0));
    }
  }
  out.c_cmp = c_cmp;
  return out;
}

}  // namespace acfb
