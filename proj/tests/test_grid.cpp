#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "acfb/csv.hpp"
#include "acfb/expr.hpp"
#include "acfb/grid.hpp"

using namespace acfb;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("grid layout") {
  Grid g = Grid::box(0.0, 1.0, -1.0, 1.0, 5, 9);
  CHECK(g.dim == 2);
  CHECK(g.h[0] == doctest::Approx(0.25));
  CHECK(g.h[1] == doctest::Approx(0.25));
  CHECK(g.node_count() == 45);
  CHECK(g.cell_count() == 32);
  CHECK(g.cell_measure() == doctest::Approx(0.0625));
  Vec2 p = g.node(g.node_index(2, 3));
  CHECK(p.x1 == doctest::Approx(0.5));
  CHECK(p.x2 == doctest::Approx(-0.25));
  CHECK(g.on_border(0, 4));
  CHECK(g.on_border(3, 8));
  CHECK_FALSE(g.on_border(2, 3));

  Grid l = Grid::line(0.0, 2.0, 9);
  CHECK(l.dim == 1);
  CHECK(l.h[0] == doctest::Approx(0.25));
  CHECK(l.cell_count() == 8);
  CHECK(l.cell_measure() == doctest::Approx(0.25));
}

TEST_CASE("gradient of an affine field is exact") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 17, 17);
  Field u = Field::from_function(g, [](Vec2 x) { return 2.0 * x.x1 - 3.0 * x.x2 + 0.5; });
  GradientField gr = gradient(u);
  for (int c = 0; c < g.cell_count(); ++c) {
    CHECK(gr.gx[c] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(gr.gy[c] == doctest::Approx(-3.0).epsilon(1e-13));
  }
  CellField mag = gr.magnitude();
  CHECK(mag.v[0] == doctest::Approx(std::sqrt(13.0)).epsilon(1e-13));
}

TEST_CASE("midpoint quadrature integrates linear fields exactly") {
  Grid g = Grid::box(0.0, 2.0, 0.0, 1.0, 33, 17);
  CellField f{g, std::vector<double>(g.cell_count())};
  for (int cj = 0; cj < g.cells(1); ++cj)
    for (int ci = 0; ci < g.cells(0); ++ci)
      f.v[g.cell_index(ci, cj)] = g.cell_center(ci, cj).x1;
  CHECK(integrate(f) == doctest::Approx(2.0).epsilon(1e-13));  // int x1 over [0,2]x[0,1]
}

TEST_CASE("ball node sets approximate the ball measure") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 129, 129);
  Ball b{{0.5, 0.5}, 0.25};
  BallNodes bn = ball_nodes(g, b);
  double area = bn.interior.size() * g.cell_measure();
  CHECK(area == doctest::Approx(M_PI * 0.0625).epsilon(0.02));
  for (int idx : bn.interior) CHECK(dist(g.node(idx), b.center) < b.radius);
  for (int idx : bn.ring) CHECK(dist(g.node(idx), b.center) >= b.radius);
  CHECK(nodes_in_closed_ball(g, b).size() >= bn.interior.size());
  double cell_area = cells_with_center_in(g, b).size() * g.cell_measure();
  CHECK(cell_area == doctest::Approx(M_PI * 0.0625).epsilon(0.02));
}

TEST_CASE("averages over symmetric balls hit the center value") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 129, 129);
  Field u = Field::from_function(g, [](Vec2 x) { return 3.0 * x.x1 - x.x2; });
  Ball b{{0.5, 0.5}, 0.25};
  CHECK(node_average(u, b) == doctest::Approx(1.0).epsilon(1e-10));
  GradientField gr = gradient(u);
  CellField gx{g, gr.gx};
  CHECK(cell_average(gx, b) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("interpolation reproduces bilinear data and clamps") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 17, 17);
  Field u = Field::from_function(g, [](Vec2 x) { return x.x1 + 2.0 * x.x2; });
  CHECK(interpolate(u, {0.333, 0.777}) == doctest::Approx(0.333 + 1.554).epsilon(1e-12));
  CHECK(interpolate(u, {-5.0, 0.5}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(interpolate(u, {2.0, 2.0}) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("field binary roundtrip preserves values and mask") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 9, 9);
  Field u = Field::from_function(g, [](Vec2 x) { return std::sin(7.0 * x.x1) * x.x2; });
  u.fixed[40] = 1;
  std::string path = temp_path("acfb_field_roundtrip.bin");
  save_field(u, path);
  Field w = load_field(path);
  REQUIRE(w.grid.same_layout(u.grid));
  for (int i = 0; i < g.node_count(); ++i) {
    CHECK(w.v[i] == u.v[i]);  // bit exact
    CHECK(w.fixed[i] == u.fixed[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("restrict_to_ball carries the ring trace") {
  Grid g = Grid::box(0.0, 1.0, 0.0, 1.0, 33, 33);
  Field u = Field::from_function(g, [](Vec2 x) { return x.x1; });
  BallPatch patch = restrict_to_ball(u, {{0.5, 0.5}, 0.2});
  REQUIRE(patch.nodes.interior.size() == patch.interior_values.size());
  REQUIRE(patch.nodes.ring.size() == patch.ring_values.size());
  for (size_t k = 0; k < patch.nodes.ring.size(); ++k)
    CHECK(patch.ring_values[k] == u.v[patch.nodes.ring[k]]);
}

TEST_CASE("csv io is byte deterministic") {
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{format_double(1.0 / 3.0), "x"}, {format_double(2e-17), "y"}};
  std::string path = temp_path("acfb_csv_roundtrip.csv");
  save_csv(t, path);
  CsvTable r = load_csv(path);
  REQUIRE(r.header == t.header);
  REQUIRE(r.rows == t.rows);
  // %.17g is enough to roundtrip doubles exactly
  CHECK(std::stod(r.rows[0][0]) == 1.0 / 3.0);
  std::remove(path.c_str());
}

TEST_CASE("report csv carries the fit row only when fitted") {
  EstimateReport rep;
  rep.name = "demo";
  rep.family = "power_law";
  rep.h = 0.125;
  rep.lambda = 1.0;
  rep.rows.push_back({"ball0", 0.25, 1.0, 2.0, 0.5, true, ""});
  CsvTable t = report_to_csv(rep);
  REQUIRE(t.rows.size() == 1);
  rep.has_fit = true;
  rep.fitted_exponent = 0.93;
  rep.fit_residual = 0.01;
  t = report_to_csv(rep);
  REQUIRE(t.rows.size() == 2);
  bool saw_fit = false;
  for (const auto& row : t.rows) saw_fit |= row[4] == "fit";
  CHECK(saw_fit);
}

TEST_CASE("merge flags diverging duplicates") {
  EstimateReport rep;
  rep.name = "demo";
  rep.family = "power_law";
  rep.h = 0.125;
  rep.lambda = 1.0;
  rep.rows.push_back({"ball0", 0.25, 1.0, 2.0, 0.5, true, ""});
  CsvTable a = report_to_csv(rep);
  rep.rows[0].lhs = 1.5;
  CsvTable b = report_to_csv(rep);
  CsvTable merged = merge_tables({a, b});
  bool saw_conflict = false;
  for (const auto& row : merged.rows)
    saw_conflict |= row.back().find("conflict") != std::string::npos;
  CHECK(saw_conflict);
  // identical tables merge silently
  CsvTable same = merge_tables({a, a});
  for (const auto& row : same.rows)
    CHECK(row.back().find("conflict") == std::string::npos);
}

TEST_CASE("expression grammar") {
  Expr e = Expr::parse("max(x1 - 0.34, 0) + abs(-x2)*pow(2, 3)");
  CHECK(e.eval(0.5, 0.25) == doctest::Approx(0.16 + 2.0).epsilon(1e-13));
  CHECK(e.eval(0.1, 0.0) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(Expr::parse("min(x1, x2)").eval(3.0, 2.0) == 2.0);
  CHECK(Expr::parse("2 + 3*4").eval(0, 0) == 14.0);
  CHECK(Expr::parse("(2 + 3)*4").eval(0, 0) == 20.0);
  CHECK(Expr::parse("-x1/4").eval(2.0, 0.0) == -0.5);
}

TEST_CASE("expression errors carry a position") {
  CHECK_THROWS_AS(Expr::parse("max(x1"), ExprError);
  CHECK_THROWS_AS(Expr::parse("x3 + 1"), ExprError);
  CHECK_THROWS_AS(Expr::parse("1 + * 2"), ExprError);
  try {
    Expr::parse("x1 + !");
  } catch (const ExprError& err) {
    CHECK(err.position == 5);
  }
}
