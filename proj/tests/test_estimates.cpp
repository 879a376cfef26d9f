#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "acfb/almost_min.hpp"
#include "acfb/blowup.hpp"
#include "acfb/estimates.hpp"
#include "acfb/functional.hpp"
#include "acfb/grid.hpp"
#include "acfb/minimize.hpp"
#include "acfb/replacement.hpp"

using namespace acfb;

namespace {

// The half-plane cone max(x1, 0): the canonical profile all ratio estimates
// are calibrated on.
Field cone_field(int n) {
  Grid g = Grid::box(-1.0, 1.0, -1.0, 1.0, n, n);
  return Field::from_function(g, [](Vec2 x) { return std::max(x.x1, 0.0); });
}

Functional quad() { return {PhiFunction::power_law(2.0), 1.0}; }

}  // namespace

TEST_CASE("caccioppoli ratio on the cone") {
  Field u = cone_field(257);
  EstimateReport rep = caccioppoli_ratio(quad(), u, {{{0.0, 0.0}, 0.4}});
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows[0];
  // the gradient indicator is exactly 1 on the positive half ball
  CHECK(row.lhs == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(row.rhs == doctest::Approx(1.0798323363262916).epsilon(1e-12));
  CHECK(row.ratio == doctest::Approx(0.46303484641055942).epsilon(1e-12));
  CHECK(row.pass);
  CHECK(rep.pass);
}

TEST_CASE("poincare ratios, cone and linear profiles") {
  Field u = cone_field(257);
  EstimateReport rep = poincare_check(quad(), u, {{{0.0, 0.0}, 0.4}});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].lhs == doctest::Approx(0.019958084081572902).epsilon(1e-12));
  CHECK(rep.rows[0].rhs == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rep.rows[0].ratio == doctest::Approx(0.013305389387715269).epsilon(1e-12));

  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 257, 257);
  Field lin = Field::from_function(g, [](Vec2 x) { return x.x1; });
  EstimateReport lrep = poincare_check(quad(), lin, {{{0.5, 0.5}, 0.25}});
  // mean (x1 - c)^2 over a disk is r^2/4, divided by (2r)^2 gives 1/16
  CHECK(lrep.rows[0].lhs == doctest::Approx(0.0626159677437437).epsilon(1e-12));
  CHECK(lrep.rows[0].rhs == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lrep.rows[0].ratio == doctest::Approx(0.03130798387187185).epsilon(1e-12));
}

TEST_CASE("reverse holder requires a small gradient modular") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 129, 129);
  Field steep = Field::from_function(g, [](Vec2 x) { return 10.0 * x.x1; });
  CHECK_THROWS(reverse_holder(quad(), steep, {{{0.5, 0.5}, 0.2}}));

  Field flat = Field::from_function(g, [](Vec2 x) { return 0.5 * x.x1; });
  EstimateReport rep = reverse_holder(quad(), flat, {{{0.5, 0.5}, 0.2}});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].pass);
  CHECK(rep.rows[0].ratio < 1.0);
}

TEST_CASE("small radius selection") {
  Field u = cone_field(129);
  Functional fn = quad();
  // positive cells around (0.5, 0): the modular over B_0.2 is tiny, the
  // measure condition saturates at 1/(2L) and the dyadic cap gives 1/8
  std::vector<int> cells = cells_with_center_in(u.grid, {{0.5, 0.0}, 0.2});
  double r0 = small_radius(fn, u, cells);
  CHECK(r0 == doctest::Approx(0.125).epsilon(1e-14));

  // a gigantic gradient pushes the bound under the floor and warns
  Field steep = Field::from_function(u.grid, [](Vec2 x) { return 1e6 * (x.x1 + 1.0); });
  std::string warning;
  double tiny = small_radius(fn, steep, cells, 0.1, &warning);
  CHECK(tiny == doctest::Approx(std::ldexp(1.0, -60)).epsilon(1e-14));
  CHECK(!warning.empty());
}

TEST_CASE("comparison estimate rejects balls beyond the admissible radius") {
  Field u = cone_field(129);
  Functional fn = quad();
  CHECK_THROWS(comparison_estimate(fn, u, {{{0.5, 0.0}, 0.3}}));
  // a small ball in the positive region, where the cone is already harmonic
  EstimateReport rep = comparison_estimate(fn, u, {{{0.5, 0.0}, 0.05}});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].lhs < 1e-8);
  CHECK(rep.rows[0].pass);
}

TEST_CASE("replacement reproduces constants to machine precision") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 65, 65);
  Field u = Field::from_function(g, [](Vec2 x) { return 3.0 + 0.0 * x.x1; });
  Ball b{{0.5, 0.5}, 0.3};
  // garbage interior data, the ring trace is what counts
  for (int idx : ball_nodes(g, b).interior) u.v[idx] = 17.0 * std::sin(idx * 0.7);
  RegularizedPhi reg = regularize(PhiFunction::power_law(2.0), g, b);
  Field w = harmonic_replacement(reg, u, b);
  for (int idx : ball_nodes(g, b).interior) CHECK(std::fabs(w.v[idx] - 3.0) < 1e-12);
}

TEST_CASE("replacement reproduces affine data") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 129, 129);
  Field u = Field::from_function(g, [](Vec2 x) { return 0.7 * x.x1 - 0.2 * x.x2; });
  Ball b{{0.5, 0.5}, 0.3};
  Field data = u;
  for (int idx : ball_nodes(g, b).interior) data.v[idx] = 0.0;
  RegularizedPhi reg = regularize(PhiFunction::power_law(2.0), g, b);
  ReplaceStats stats;
  Field w = harmonic_replacement(reg, data, b, {}, &stats);
  CHECK(stats.converged);
  double sup = 0.0;
  for (int idx : ball_nodes(g, b).interior) sup = std::max(sup, std::fabs(w.v[idx] - u.v[idx]));
  CHECK(sup < 1e-8);
  // nodes outside the ball keep their data bit for bit
  for (int i = 0; i < g.node_count(); ++i)
    if (std::find(ball_nodes(g, b).interior.begin(), ball_nodes(g, b).interior.end(), i) ==
        ball_nodes(g, b).interior.end())
      CHECK(w.v[i] == data.v[i]);
}

TEST_CASE("replacement matches a smooth harmonic oracle") {
  // log|x - x_s| with the pole outside the domain is harmonic in the ball
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 257, 257);
  Vec2 pole{1.5, 1.5};
  Field u = Field::from_function(g, [pole](Vec2 x) { return std::log(dist(x, pole)); });
  Ball b{{0.5, 0.5}, 0.25};
  Field data = u;
  for (int idx : ball_nodes(g, b).interior) data.v[idx] = 0.0;
  RegularizedPhi reg = regularize(PhiFunction::power_law(2.0), g, b);
  Field w = harmonic_replacement(reg, data, b);
  double sup = 0.0;
  for (int idx : ball_nodes(g, b).interior) sup = std::max(sup, std::fabs(w.v[idx] - u.v[idx]));
  CHECK(sup < 1e-3);
}

TEST_CASE("replacement obeys the maximum principle") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 33, 33);
  Ball b{{0.5, 0.5}, 0.3};
  BallNodes bn = ball_nodes(g, b);
  RegularizedPhi reg = regularize(PhiFunction::power_law(2.0), g, b);
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> dist01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Field u = Field::zeros(g);
    for (int i = 0; i < g.node_count(); ++i) u.v[i] = dist01(rng);
    Field w = harmonic_replacement(reg, u, b);
    double lo = 1e300, hi = -1e300;
    for (int idx : bn.ring) {
      lo = std::min(lo, u.v[idx]);
      hi = std::max(hi, u.v[idx]);
    }
    for (int idx : bn.interior) {
      CHECK(w.v[idx] >= lo - 1e-12);
      CHECK(w.v[idx] <= hi + 1e-12);
    }
  }
}

TEST_CASE("replacement minimizes the regularized dirichlet energy") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 65, 65);
  Ball b{{0.5, 0.5}, 0.3};
  Field u = Field::from_function(g, [](Vec2 x) {
    return 0.5 + 0.3 * std::sin(9.0 * x.x1) * std::cos(7.0 * x.x2);
  });
  PhiFunction dp = PhiFunction::double_phase(2.0, 2.2, Coefficient::constant(0.3),
                                             {2.0, 2.2, 1.3, {1.0, 1.0}});
  RegularizedPhi reg = regularize(dp, g, b);
  Field w = harmonic_replacement(reg, u, b);
  auto dirichlet = [&](const Field& f) {
    GradientField gr = gradient(f);
    double total = 0.0;
    for (int c : ball_nodes(g, b).cells) {
      double m = std::sqrt(gr.gx[c] * gr.gx[c] + gr.gy[c] * gr.gy[c]);
      total += g.cell_measure() * reg.eval(m);
    }
    return total;
  };
  CHECK(dirichlet(w) <= dirichlet(u) * (1.0 + 1e-9));
}

TEST_CASE("morrey decay verdicts") {
  Field cone = cone_field(257);
  EstimateReport flat = morrey_decay(cone, {0.0, 0.0}, {0.1, 0.2, 0.4}, 0.1);
  CHECK(flat.has_fit);
  CHECK(std::fabs(flat.fitted_exponent) < 0.02);  // means are radius free
  CHECK(flat.pass);

  Grid g = Grid::box(-1.0, 1.0, -1.0, 1.0, 257, 257);
  Field cusp = Field::from_function(g, [](Vec2 x) { return std::pow(x.norm(), 0.3); });
  EstimateReport steep = morrey_decay(cusp, {0.0, 0.0}, {0.1, 0.2, 0.4}, 0.1);
  CHECK(steep.fitted_exponent < -0.5);
  CHECK_FALSE(steep.pass);
}

TEST_CASE("growth dichotomy on the cone") {
  Field u = cone_field(257);
  EstimateReport rep = growth_dichotomy(u, {0.0, 0.0}, 6);
  REQUIRE(rep.rows.size() == 6);
  for (const auto& row : rep.rows) {
    CHECK(row.ratio == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(row.pass);
  }
  CHECK(rep.has_fit);
  CHECK(rep.fitted_exponent == doctest::Approx(1.0).epsilon(1e-12));  // S_k = 2^-k
  CHECK(rep.pass);
}

TEST_CASE("holder seminorm matches an exhaustive reference") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 17, 17);
  Field u = Field::from_function(g, [](Vec2 x) {
    return std::sin(5.0 * x.x1) + 0.3 * x.x2 * x.x2;
  });
  Ball region{{0.5, 0.5}, 0.45};
  double alpha = 0.7;
  std::vector<int> nodes = nodes_in_closed_ball(g, region);
  double ref = 0.0;
  for (size_t a = 0; a < nodes.size(); ++a)
    for (size_t c = a + 1; c < nodes.size(); ++c) {
      double d = dist(g.node(nodes[a]), g.node(nodes[c]));
      if (d > 0.0)
        ref = std::max(ref, std::fabs(u.v[nodes[a]] - u.v[nodes[c]]) / std::pow(d, alpha));
    }
  CHECK(holder_seminorm(u, alpha, region) == doctest::Approx(ref).epsilon(1e-12));

  Field lin = Field::from_function(g, [](Vec2 x) { return x.x1; });
  CHECK(holder_seminorm(lin, 1.0, region) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("maximal function properties") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 33, 33);
  CellField c{g, std::vector<double>(g.cell_count(), 2.5)};
  CellField mc = maximal_function(c, 0.25);
  for (double v : mc.v) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist01(0.0, 1.0);
  CellField f{g, std::vector<double>(g.cell_count())};
  CellField h{g, std::vector<double>(g.cell_count())};
  for (int i = 0; i < g.cell_count(); ++i) {
    f.v[i] = dist01(rng);
    h.v[i] = dist01(rng);
  }
  CellField mf = maximal_function(f, 0.25);
  CellField mh = maximal_function(h, 0.25);
  CellField sum{g, std::vector<double>(g.cell_count())};
  for (int i = 0; i < g.cell_count(); ++i) sum.v[i] = f.v[i] + h.v[i];
  CellField msum = maximal_function(sum, 0.25);
  double supf = *std::max_element(f.v.begin(), f.v.end());
  for (int i = 0; i < g.cell_count(); ++i) {
    CHECK(mf.v[i] <= supf + 1e-12);  // means of f never exceed its sup
    CHECK(msum.v[i] <= mf.v[i] + mh.v[i] + 1e-12);
  }
}

TEST_CASE("lipschitz certificate across resolutions") {
  Field coarse = cone_field(129);
  Field fine = cone_field(257);
  Ball region{{0.0, 0.0}, 0.45};
  EstimateReport ok = lipschitz_certificate(coarse, fine, region);
  CHECK(ok.pass);

  Field inflated = cone_field(257);
  for (double& v : inflated.v) v *= 1.2;
  EstimateReport bad = lipschitz_certificate(coarse, inflated, region);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("gradient excess decay on a smooth field") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 129, 129);
  Field u = Field::from_function(g, [](Vec2 x) { return x.x1 * x.x1 + x.x2 * x.x2; });
  EstimateReport rep =
      gradient_excess_decay(u, {0.6, 0.6}, {0.05, 0.1, 0.2}, {1.0, 0.5}, 0.8);
  CHECK(rep.has_fit);
  CHECK(rep.fitted_exponent > 0.8);  // the excess of a C^1 gradient scales like rho
  CHECK(rep.pass);
}

TEST_CASE("free boundary points hug the interface") {
  Field u = cone_field(129);
  std::vector<int> fb = free_boundary_points(u);
  CHECK(fb.size() >= 127);
  for (int idx : fb) CHECK(std::fabs(u.grid.node(idx).x1) <= u.grid.h[0] + 1e-14);
}

TEST_CASE("blowup of the cone is self similar") {
  Field u = cone_field(257);
  BlowupRun br = blowup_run(quad(), u, {0.0, 0.0}, 5);
  REQUIRE(br.r.size() == 5);
  for (size_t j = 0; j < br.r.size(); ++j) {
    CHECK(br.el_residual[j] <= 1e-12);
    CHECK(br.weight[j] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(br.phi_r[j] == doctest::Approx(br.r[j]).epsilon(1e-12));
  }
  for (double inc : br.sup_increment) CHECK(inc <= 1e-12);
  CHECK(br.report.pass);
  // the rescaled limit keeps the unit slope of the cone
  GradientField gr = gradient(br.v_limit);
  double gmax = 0.0;
  for (double v : gr.gx) gmax = std::max(gmax, std::fabs(v));
  CHECK(gmax == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("almost minimality certificate") {
  Grid g = Grid::line(0.0, 1.0, 257);
  Field bc = Field::from_function(g, [](Vec2 x) { return 0.5 * x.x1; });
  Functional fn = quad();
  SolveResult res = minimize(fn, bc);
  AlmostMinCert cert =
      check_almost_min(fn, res.u, 0.05, 1.0, {{{0.5, 0.0}, 0.12}, {{0.75, 0.0}, 0.1}});
  CHECK(cert.pass);
  CHECK(cert.worst_ratio <= 1.0 + 0.05 * std::pow(0.12, 1.0));

  // a wiggly profile loses to its own harmonic replacement
  Field wiggle = Field::from_function(
      g, [](Vec2 x) { return 0.3 + 0.2 * std::sin(25.0 * x.x1) * x.x1 * (1.0 - x.x1); });
  AlmostMinCert bad = check_almost_min(fn, wiggle, 0.05, 1.0, {{{0.5, 0.0}, 0.12}});
  CHECK_FALSE(bad.pass);
}
