#pragma once

#include <vector>

#include "acfb/grid.hpp"
#include "acfb/phi.hpp"

namespace acfb {

// A cell counts as positive when any of its corner values exceeds
// kPosThresholdRel times the field's sup. Single source for the threshold.
inline constexpr double kPosThresholdRel = 1e-10;

inline double positivity_threshold(const Field& u) { return kPosThresholdRel * u.sup_abs(); }

struct Functional {
  PhiFunction phi;
  double lambda = 1.0;
};

// Integrand with spatial coefficients frozen at the cell centers, so the
// solver loops touch no expression evaluation.
class BakedPhi {
 public:
  BakedPhi() = default;
  BakedPhi(const PhiFunction& phi, const Grid& g);

  double eval(int cell, double t) const;
  double deriv(int cell, double t) const;
  int cell_count() const { return static_cast<int>(coef_.empty() ? pexp_.size() : coef_.size()); }

 private:
  PhiFamily family_ = PhiFamily::PowerLaw;
  double p_ = 2.0, q_ = 2.0;
  const PhiFunction* phi_ = nullptr;  // Tabulated falls back to the source
  std::vector<double> coef_;  // a(x_c)
  std::vector<double> pexp_;  // p(x_c)
};

// Exact discrete energy: sum over cells of
//   [ phi(x_c, |grad u|_c) + lambda chi(cell positive) ] |cell|.
double energy(const Functional& fn, const Field& u);

// Same sum restricted to a cell subset (ball problems and competitors).
double energy_on_cells(const Functional& fn, const Field& u, const std::vector<int>& cells);

}  // namespace acfb
