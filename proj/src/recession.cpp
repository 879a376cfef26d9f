#include "acfb/recession.hpp"

#include <cmath>
#include <stdexcept>

namespace acfb {

double BlowupPhi::eval(Vec2 x, double t) const {
  return base->eval(anchor + r_j * x, sigma_j * t) / norm;
}

double BlowupPhi::eval_deriv(Vec2 x, double t) const {
  return sigma_j * base->eval_deriv(anchor + r_j * x, sigma_j * t) / norm;
}

BlowupPhi blowup_phi(const PhiFunction& phi, Vec2 anchor, double r_j, double sigma_j) {
  if (!(r_j > 0.0) || !(sigma_j > 0.0))
    throw std::invalid_argument("blowup_phi needs positive scales");
  BlowupPhi bp;
  bp.base = &phi;
  bp.anchor = anchor;
  bp.r_j = r_j;
  bp.sigma_j = sigma_j;
  bp.norm = phi.eval(anchor, sigma_j);
  if (!(bp.norm > 0.0)) throw std::runtime_error("blowup_phi: phi(x0, sigma) vanishes");
  return bp;
}

std::vector<double> default_sigmas(int jmax) {
  std::vector<double> s;
  for (int j = 1; j <= jmax; ++j) s.push_back(std::pow(2.0, j));
  return s;
}

RecessionReport recession_limit(const PhiFunction& phi, const std::vector<double>& sigmas,
                                std::vector<double> tgrid, Vec2 anchor) {
  if (sigmas.empty()) throw std::invalid_argument("recession_limit needs a sigma sequence");
  if (tgrid.empty()) tgrid = log_spaced(0.1, 10.0, 101);
  RecessionReport rep;
  rep.tgrid = tgrid;
  rep.sigmas = sigmas;
  for (double sigma : sigmas) {
    double norm = phi.eval(anchor, sigma);
    if (!(norm > 0.0)) throw std::runtime_error("recession_limit: phi(x0, sigma) vanishes");
    std::vector<double> it(tgrid.size());
    for (std::size_t k = 0; k < tgrid.size(); ++k)
      it[k] = phi.eval(anchor, tgrid[k] * sigma) / norm;
    rep.iterates.push_back(std::move(it));
  }
  for (std::size_t j = 1; j < rep.iterates.size(); ++j) {
    double d = 0.0;
    for (std::size_t k = 0; k < tgrid.size(); ++k)
      d = std::max(d, std::fabs(rep.iterates[j][k] - rep.iterates[j - 1][k]));
    rep.sup_increments.push_back(d);
  }

  const std::vector<double>& last = rep.iterates.back();
  // convexity via second divided differences on the (nonuniform) t grid
  for (std::size_t k = 1; k + 1 < tgrid.size(); ++k) {
    double dl = (last[k] - last[k - 1]) / (tgrid[k] - tgrid[k - 1]);
    double dr = (last[k + 1] - last[k]) / (tgrid[k + 1] - tgrid[k]);
    if (dr < dl * (1.0 - 1e-9) - 1e-12) rep.convex = false;
  }
  for (std::size_t k = 1; k < tgrid.size(); ++k) {
    double s = std::log(last[k] / last[k - 1]) / std::log(tgrid[k] / tgrid[k - 1]);
    if (s < phi.env.p - 1e-6 || s > phi.env.q + 1e-6) rep.slopes_ok = false;
  }
  rep.limit = PhiFunction::tabulated(tgrid, last,
                                     {phi.env.p, phi.env.q, 1.0, {0.0, 1.0}});
  return rep;
}

}  // namespace acfb
