#include "acfb/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace acfb {

namespace {
inline double pow_e(double t, double e) {
  if (e == 2.0) return t * t;
  if (e == 3.0) return t * t * t;
  if (e == 1.0) return t;
  return std::pow(t, e);
}
}  // namespace

BakedPhi::BakedPhi(const PhiFunction& phi, const Grid& g) {
  family_ = phi.family;
  p_ = phi.p;
  q_ = phi.q;
  phi_ = &phi;
  int nc = g.cell_count();
  int ncx = g.n[0] - 1;
  auto center = [&](int c) {
    return g.dim == 1 ? g.cell_center(c, 0) : g.cell_center(c % ncx, c / ncx);
  };
  switch (family_) {
    case PhiFamily::PerturbedOrlicz:
    case PhiFamily::DoublePhase: {
      coef_.resize(nc);
      for (int c = 0; c < nc; ++c) {
        coef_[c] = phi.a(center(c));
        if (!(coef_[c] >= 0.0) || !std::isfinite(coef_[c]))
          throw std::domain_error("coefficient a(x) must be finite and nonnegative");
      }
      break;
    }
    case PhiFamily::VariableExponent: {
      pexp_.resize(nc);
      for (int c = 0; c < nc; ++c) {
        pexp_[c] = phi.pvar(center(c));
        if (!(pexp_[c] > 1.0) || !std::isfinite(pexp_[c]))
          throw std::domain_error("exponent p(x) must be finite and > 1");
      }
      break;
    }
    case PhiFamily::PowerLaw:
    case PhiFamily::Tabulated: {
      coef_.resize(nc, 0.0);
      break;
    }
  }
}

double BakedPhi::eval(int cell, double t) const {
  if (t <= 0.0) return 0.0;
  switch (family_) {
    case PhiFamily::PowerLaw: return pow_e(t, p_);
    case PhiFamily::PerturbedOrlicz: return coef_[cell] * pow_e(t, p_);
    case PhiFamily::VariableExponent: return std::pow(t, pexp_[cell]);
    case PhiFamily::DoublePhase: return pow_e(t, p_) + coef_[cell] * pow_e(t, q_);
    case PhiFamily::Tabulated: return phi_->eval({0, 0}, t);
  }
  return 0.0;
}

double BakedPhi::deriv(int cell, double t) const {
  if (t <= 0.0) return 0.0;
  switch (family_) {
    case PhiFamily::PowerLaw: return p_ * pow_e(t, p_ - 1.0);
    case PhiFamily::PerturbedOrlicz: return coef_[cell] * p_ * pow_e(t, p_ - 1.0);
    case PhiFamily::VariableExponent: {
      double px = pexp_[cell];
      return px * std::pow(t, px - 1.0);
    }
    case PhiFamily::DoublePhase:
      return p_ * pow_e(t, p_ - 1.0) + coef_[cell] * q_ * pow_e(t, q_ - 1.0);
    case PhiFamily::Tabulated: return phi_->eval_deriv({0, 0}, t);
  }
  return 0.0;
}

namespace {

double cell_energy_sum(const Functional& fn, const Field& u, const std::vector<int>* cells) {
  const Grid& g = u.grid;
  double floor = -1e-12 * std::max(1.0, u.sup_abs());
  if (u.min_value() < floor)
    throw std::domain_error("energy: field has a negative nodal value");
  BakedPhi baked(fn.phi, g);
  GradientField grad = gradient(u);
  double tau = positivity_threshold(u);
  double measure = g.cell_measure();
  int ncx = g.n[0] - 1;
  auto cell_term = [&](int c) {
    double m;
    if (g.dim == 1) {
      m = std::fabs(grad.gx[c]);
    } else {
      m = std::sqrt(grad.gx[c] * grad.gx[c] + grad.gy[c] * grad.gy[c]);
    }
    double val = baked.eval(c, m);
    bool positive;
    if (g.dim == 1) {
      positive = u.v[c] > tau || u.v[c + 1] > tau;
    } else {
      int ci = c % ncx, cj = c / ncx;
      int a = g.node_index(ci, cj);
      positive = u.v[a] > tau || u.v[a + 1] > tau || u.v[a + g.n[0]] > tau ||
                 u.v[a + g.n[0] + 1] > tau;
    }
    if (positive) val += fn.lambda;
    return val;
  };
  double s = 0.0;
  if (cells) {
    for (int c : *cells) s += cell_term(c);
  } else {
    int nc = g.cell_count();
    for (int c = 0; c < nc; ++c) s += cell_term(c);
  }
  return s * measure;
}

}  // namespace

double energy(const Functional& fn, const Field& u) { return cell_energy_sum(fn, u, nullptr); }

double energy_on_cells(const Functional& fn, const Field& u, const std::vector<int>& cells) {
  return cell_energy_sum(fn, u, &cells);
}

}  // namespace acfb
