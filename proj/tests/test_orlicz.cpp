#include <doctest.h>

#include <cmath>
#include <vector>

#include "acfb/conditions.hpp"
#include "acfb/phi.hpp"
#include "acfb/recession.hpp"
#include "acfb/regularize.hpp"

using namespace acfb;

namespace {

Grid unit_square(int n = 17) { return Grid::box(0.0, 1.0, 0.0, 1.0, n, n); }

PhiFunction double_phase_smooth() {
  return PhiFunction::double_phase(2.0, 2.2, Coefficient::expression("0.1 + 0.2*x1"),
                                   {2.0, 2.2, 1.3, {0.35, 0.3}});
}

}  // namespace

TEST_CASE("family point values") {
  PhiFunction pl = PhiFunction::power_law(2.0);
  CHECK(pl.eval({0.3, 0.7}, 1.5) == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(pl.eval_deriv({0.3, 0.7}, 1.5) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(pl.eval({0.0, 0.0}, 0.0) == 0.0);
  CHECK(pl.eval_deriv({0.0, 0.0}, 0.0) == 0.0);
  CHECK(pl.autonomous());

  PhiFunction dp = PhiFunction::double_phase(2.0, 3.0, Coefficient::constant(0.5),
                                             {2.0, 3.0, 1.5, {1.0, 1.0}});
  CHECK(dp.eval({0.1, 0.1}, 2.0) == doctest::Approx(4.0 + 0.5 * 8.0).epsilon(1e-14));
  CHECK(dp.eval_deriv({0.1, 0.1}, 2.0) == doctest::Approx(4.0 + 1.5 * 4.0).epsilon(1e-14));

  PhiFunction ve = PhiFunction::variable_exponent(Coefficient::expression("2 + x1"),
                                                  {2.0, 3.0, 1.0, {1.0, 1.0}});
  CHECK(ve.eval({0.5, 0.0}, 2.0) == doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-14));
  CHECK(!ve.autonomous());

  PhiFunction po = PhiFunction::perturbed_orlicz(2.0, Coefficient::expression("1 + x2"),
                                                 {2.0, 2.0, 2.0, {1.0, 1.0}});
  CHECK(po.eval({0.0, 0.5}, 3.0) == doctest::Approx(1.5 * 9.0).epsilon(1e-14));
}

TEST_CASE("tabulated interpolation and tails") {
  std::vector<double> t = log_spaced(1e-3, 1e3, 61);
  std::vector<double> v;
  for (double ti : t) v.push_back(ti * ti);
  PhiFunction tab = PhiFunction::tabulated(t, v, {2.0, 2.0, 1.0, {1.0, 1.0}});
  // log-log linear interpolation is exact on a pure power
  for (double s : {2.5e-3, 0.137, 1.0, 42.0})
    CHECK(tab.eval({0, 0}, s) == doctest::Approx(s * s).epsilon(1e-12));
  // tails extrapolate with the boundary slope, here 2
  CHECK(tab.eval({0, 0}, 1e5) == doctest::Approx(1e10).epsilon(1e-9));
  CHECK(tab.eval({0, 0}, 1e-5) == doctest::Approx(1e-10).epsilon(1e-9));
  CHECK(tab.eval({0, 0}, 0.0) == 0.0);
}

TEST_CASE("inc and dec verdicts") {
  Grid g = unit_square();
  PhiFunction pl3 = PhiFunction::power_law(3.0);
  CHECK(check_inc(pl3, g, 3.0).pass);
  CHECK(check_inc(pl3, g, 2.0).pass);
  CHECK_FALSE(check_inc(pl3, g, 3.5).pass);  // t^3/t^3.5 decreases
  CHECK(check_dec(pl3, g, 3.0).pass);
  CHECK(check_dec(pl3, g, 4.0).pass);
  CHECK_FALSE(check_dec(pl3, g, 2.5).pass);

  PhiFunction dp = double_phase_smooth();
  CHECK(check_inc(dp, g, 2.0).pass);
  CHECK(check_dec(dp, g, 2.2).pass);
  CHECK_FALSE(check_dec(dp, g, 2.1).pass);  // the t^2.2 phase dominates
}

TEST_CASE("A0 verdicts") {
  Grid g = unit_square();
  PhiFunction po = PhiFunction::perturbed_orlicz(2.0, Coefficient::constant(2.0),
                                                 {2.0, 2.0, 2.0, {1.0, 1.0}});
  CHECK(check_A0(po, g, 2.0).pass);
  CHECK_FALSE(check_A0(po, g, 1.5).pass);  // phi(x,1) = 2 > 1.5
  CHECK(check_A0(PhiFunction::power_law(2.0), g, 1.0).pass);
}

TEST_CASE("sandwich consistency") {
  Grid g = unit_square();
  CHECK(check_sandwich(double_phase_smooth(), g).pass);
  // declaring q below the true top power breaks t phi_t <= q phi at large t
  PhiFunction bad = PhiFunction::double_phase(2.0, 3.0, Coefficient::constant(0.5),
                                              {2.0, 2.5, 1.5, {1.0, 1.0}});
  CHECK_FALSE(check_sandwich(bad, g).pass);
}

TEST_CASE("VA1 oscillation") {
  Grid g = unit_square(33);
  std::vector<Ball> balls = {{{0.5, 0.5}, 0.2}, {{0.3, 0.6}, 0.15}};
  // an autonomous integrand has no oscillation at all
  CHECK(check_VA1(PhiFunction::power_law(2.0), g, {0.0, 1.0}, balls).pass);
  PhiFunction ve = PhiFunction::variable_exponent(Coefficient::expression("2 + 0.6*x2"),
                                                  {2.0, 2.6, 1.0, {1.1, 0.45}});
  CHECK(check_VA1(ve, g, {1.1, 0.45}, balls).pass);
  // a modulus far below the actual oscillation of p(x) must fail
  CHECK_FALSE(check_VA1(ve, g, {1e-4, 1.0}, balls).pass);
}

TEST_CASE("regularize detects pure powers") {
  Grid g = unit_square();
  RegularizedPhi reg = regularize(PhiFunction::power_law(3.0), g, {{0.5, 0.5}, 0.2});
  CHECK(reg.power_law);
  CHECK(reg.power_exponent == doctest::Approx(3.0).epsilon(1e-9));
  for (double t : {1e-4, 0.3, 1.0, 7.0, 1e3})
    CHECK(reg.eval(t) == doctest::Approx(reg.power_coeff * std::pow(t, 3.0)).epsilon(1e-10));
  CHECK(reg.deriv(2.0) == doctest::Approx(3.0 * reg.power_coeff * 4.0).epsilon(1e-9));
}

TEST_CASE("regularize invariants on a genuine table") {
  Grid g = unit_square(33);
  PhiFunction dp = double_phase_smooth();
  RegularizedPhi reg = regularize(dp, g, {{0.5, 0.5}, 0.2});
  CHECK_FALSE(reg.power_law);
  CHECK(reg.c_cmp > 0.0);
  // slope bracket [p-1, q-1] for the derivative table, small kernel slack
  for (double t : log_spaced(1e-4, 1e4, 33)) {
    double s = reg.dslope(t);
    CHECK(s >= reg.p - 1.0 - 1e-3);
    CHECK(s <= reg.q - 1.0 + 1e-3);
    CHECK(reg.deriv2(t) >= -1e-9 * std::max(1.0, reg.deriv(t)));
  }
  // the envelope construction stays below phi + 1 up to the recorded factor
  for (double t : log_spaced(1e-2, 1e2, 17))
    CHECK(reg.eval(t) <= reg.c_cmp * (dp.eval({0.5, 0.5}, t) + 1.0) * (1.0 + 1e-9));
}

TEST_CASE("recession limit of a double phase integrand") {
  PhiFunction dp = PhiFunction::double_phase(2.0, 3.0, Coefficient::constant(0.3),
                                             {2.0, 3.0, 2.0, {1.0, 1.0}});
  RecessionReport rec = recession_limit(dp, default_sigmas(40));
  CHECK(rec.convex);
  CHECK(rec.slopes_ok);
  REQUIRE(!rec.sup_increments.empty());
  CHECK(rec.sup_increments.back() < 1e-8);
  // phi(t sigma)/phi(sigma) -> t^3: the top phase wins
  double norm = rec.limit.eval({0, 0}, 1.0);
  for (double t : log_spaced(0.1, 10.0, 41)) {
    double got = rec.limit.eval({0, 0}, t) / norm;
    double want = t * t * t;
    CHECK(std::fabs(got - want) / std::max(1.0, want) < 1e-9);
  }
}

TEST_CASE("recession of a pure power is itself") {
  PhiFunction pl = PhiFunction::power_law(2.0);
  RecessionReport rec = recession_limit(pl, default_sigmas(10));
  double norm = rec.limit.eval({0, 0}, 1.0);
  for (double t : log_spaced(0.1, 10.0, 17))
    CHECK(rec.limit.eval({0, 0}, t) / norm == doctest::Approx(t * t).epsilon(1e-10));
  for (double inc : rec.sup_increments) CHECK(inc < 1e-12);
}

TEST_CASE("blowup rescaling is exact on power laws") {
  PhiFunction pl = PhiFunction::power_law(2.5);
  for (double sigma : {1.0, 8.0, 1024.0}) {
    BlowupPhi bp = blowup_phi(pl, {0.25, 0.75}, 0.125, sigma);
    CHECK(bp.eval({0.0, 0.0}, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double t : {0.3, 1.7, 5.0})
      CHECK(bp.eval({0.4, -0.2}, t) == doctest::Approx(std::pow(t, 2.5)).epsilon(1e-12));
  }
}

TEST_CASE("ball envelope orders lo and hi") {
  Grid g = unit_square(33);
  PhiFunction dp = double_phase_smooth();
  BallEnvelope env = ball_envelope(dp, g, {{0.5, 0.5}, 0.25}, default_tgrid());
  REQUIRE(env.t.size() == env.lo.size());
  REQUIRE(env.t.size() == env.hi.size());
  for (size_t i = 0; i < env.t.size(); ++i) {
    CHECK(env.lo[i] <= env.hi[i]);
    CHECK(env.lo[i] <= dp.eval({0.5, 0.5}, env.t[i]) * (1 + 1e-12));
    CHECK(env.hi[i] >= dp.eval({0.5, 0.5}, env.t[i]) * (1 - 1e-12));
  }
}

TEST_CASE("omega modulus saturates at one") {
  OmegaModulus om{0.35, 0.3};
  CHECK(om(0.0) == 0.0);
  CHECK(om(0.01) == doctest::Approx(0.35 * std::pow(0.01, 0.3)).epsilon(1e-14));
  CHECK(om(1e6) == 1.0);
}
