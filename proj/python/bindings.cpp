#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "acfb/blowup.hpp"
#include "acfb/conditions.hpp"
#include "acfb/config.hpp"
#include "acfb/estimates.hpp"
#include "acfb/exact1d.hpp"
#include "acfb/expr.hpp"
#include "acfb/functional.hpp"
#include "acfb/grid.hpp"
#include "acfb/minimize.hpp"
#include "acfb/recession.hpp"
#include "acfb/regularize.hpp"
#include "acfb/replacement.hpp"
#include "acfb/runner.hpp"

namespace py = pybind11;
using namespace acfb;

namespace {

Coefficient make_coefficient(const py::object& a) {
  if (py::isinstance<py::str>(a)) return Coefficient::expression(a.cast<std::string>());
  return Coefficient::constant(a.cast<double>());
}

py::array_t<double> field_values(const Field& f) {
  if (f.grid.dim == 1) {
    py::array_t<double> out(f.grid.n[0]);
    std::copy(f.v.begin(), f.v.end(), out.mutable_data());
    return out;
  }
  py::array_t<double> out({f.grid.n[1], f.grid.n[0]});
  std::copy(f.v.begin(), f.v.end(), out.mutable_data());
  return out;
}

Field field_from_array(const Grid& g, py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.size() != g.node_count()) throw std::invalid_argument("array size does not match grid");
  Field f = Field::zeros(g);
  const double* src = arr.data();
  std::copy(src, src + g.node_count(), f.v.begin());
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      if (g.on_border(i, j)) f.fixed[g.node_index(i, j)] = 1;
  return f;
}

Field field_from_expr(const Grid& g, const std::string& src) {
  Expr e = Expr::parse(src);
  return Field::from_function(g, [&](Vec2 x) { return e.eval(x.x1, x.x2); });
}

const char* kind_name(Exact1DSolution::Kind k) {
  switch (k) {
    case Exact1DSolution::Kind::Zero: return "zero";
    case Exact1DSolution::Kind::Linear: return "linear";
    case Exact1DSolution::Kind::ConeLeft: return "cone_left";
    case Exact1DSolution::Kind::ConeRight: return "cone_right";
    case Exact1DSolution::Kind::TwoSided: return "two_sided";
  }
  return "?";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "discrete almost-minimizers and harmonic replacements for "
            "generalized Orlicz free-boundary energies";

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<double, double>(), py::arg("x1"), py::arg("x2") = 0.0)
      .def_readwrite("x1", &Vec2::x1)
      .def_readwrite("x2", &Vec2::x2)
      .def("norm", &Vec2::norm);

  py::class_<Ball>(m, "Ball")
      .def(py::init([](double cx, double cy, double r) { return Ball{{cx, cy}, r}; }),
           py::arg("cx"), py::arg("cy"), py::arg("radius"))
      .def_readwrite("center", &Ball::center)
      .def_readwrite("radius", &Ball::radius)
      .def("scaled", &Ball::scaled);

  py::class_<OmegaModulus>(m, "OmegaModulus")
      .def(py::init([](double C, double theta) { return OmegaModulus{C, theta}; }),
           py::arg("C"), py::arg("theta"))
      .def_readwrite("C", &OmegaModulus::C)
      .def_readwrite("theta", &OmegaModulus::theta)
      .def("__call__", &OmegaModulus::operator());

  py::class_<GrowthEnvelope>(m, "GrowthEnvelope")
      .def(py::init([](double p, double q, double L, OmegaModulus omega) {
             return GrowthEnvelope{p, q, L, omega};
           }),
           py::arg("p"), py::arg("q"), py::arg("L") = 1.0,
           py::arg("omega") = OmegaModulus{0.0, 1.0})
      .def_readwrite("p", &GrowthEnvelope::p)
      .def_readwrite("q", &GrowthEnvelope::q)
      .def_readwrite("L", &GrowthEnvelope::L)
      .def_readwrite("omega", &GrowthEnvelope::omega);

  py::class_<PhiFunction>(m, "PhiFunction")
      .def("eval", [](const PhiFunction& f, double x1, double x2, double t) {
        return f.eval({x1, x2}, t);
      })
      .def("deriv", [](const PhiFunction& f, double x1, double x2, double t) {
        return f.eval_deriv({x1, x2}, t);
      })
      .def("autonomous", &PhiFunction::autonomous)
      .def_readonly("env", &PhiFunction::env);

  m.def("power_law", &PhiFunction::power_law, py::arg("p"));
  m.def("double_phase",
        [](double p, double q, const py::object& a, const GrowthEnvelope& env) {
          return PhiFunction::double_phase(p, q, make_coefficient(a), env);
        },
        py::arg("p"), py::arg("q"), py::arg("a"), py::arg("env"));
  m.def("variable_exponent",
        [](const std::string& p, const GrowthEnvelope& env) {
          return PhiFunction::variable_exponent(Coefficient::expression(p), env);
        },
        py::arg("p"), py::arg("env"));
  m.def("perturbed_orlicz",
        [](double p, const py::object& a, const GrowthEnvelope& env) {
          return PhiFunction::perturbed_orlicz(p, make_coefficient(a), env);
        },
        py::arg("p"), py::arg("a"), py::arg("env"));

  py::class_<Grid>(m, "Grid")
      .def_static("line", &Grid::line, py::arg("a"), py::arg("b"), py::arg("n"))
      .def_static("box", &Grid::box, py::arg("ax"), py::arg("bx"), py::arg("ay"),
                  py::arg("by"), py::arg("n1"), py::arg("n2"))
      .def_readonly("dim", &Grid::dim)
      .def_property_readonly("n", [](const Grid& g) { return std::make_pair(g.n[0], g.n[1]); })
      .def_property_readonly("h", [](const Grid& g) { return std::make_pair(g.h[0], g.h[1]); })
      .def("node_count", &Grid::node_count)
      .def("cell_count", &Grid::cell_count)
      .def("node", [](const Grid& g, int idx) { return g.node(idx); });

  py::class_<Field>(m, "Field")
      .def_static("zeros", &Field::zeros)
      .def_static("from_expr", &field_from_expr, py::arg("grid"), py::arg("src"))
      .def_static("from_array", &field_from_array, py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &Field::grid)
      .def("values", &field_values)
      .def("sup_abs", &Field::sup_abs)
      .def("min_value", &Field::min_value)
      .def("max_value", &Field::max_value);

  py::class_<ConditionVerdict>(m, "ConditionVerdict")
      .def_readonly("pass_", &ConditionVerdict::pass)
      .def_readonly("worst", &ConditionVerdict::worst)
      .def_readonly("where", &ConditionVerdict::where)
      .def("__bool__", [](const ConditionVerdict& v) { return v.pass; });

  m.def("check_inc",
        [](const PhiFunction& f, const Grid& g, double p) { return check_inc(f, g, p); },
        py::arg("phi"), py::arg("grid"), py::arg("p"));
  m.def("check_dec",
        [](const PhiFunction& f, const Grid& g, double q) { return check_dec(f, g, q); },
        py::arg("phi"), py::arg("grid"), py::arg("q"));
  m.def("check_A0",
        [](const PhiFunction& f, const Grid& g, double L) { return check_A0(f, g, L); },
        py::arg("phi"), py::arg("grid"), py::arg("L"));
  m.def("check_VA1",
        [](const PhiFunction& f, const Grid& g, const OmegaModulus& w,
           const std::vector<Ball>& balls) { return check_VA1(f, g, w, balls); },
        py::arg("phi"), py::arg("grid"), py::arg("omega"), py::arg("balls"));
  m.def("check_sandwich",
        [](const PhiFunction& f, const Grid& g) { return check_sandwich(f, g); },
        py::arg("phi"), py::arg("grid"));

  py::class_<Exact1DSolution>(m, "Exact1DSolution")
      .def_readonly("energy", &Exact1DSolution::energy)
      .def_readonly("lambda_star", &Exact1DSolution::lambda_star)
      .def_readonly("slope_residual", &Exact1DSolution::slope_residual)
      .def_readonly("breakpoints", &Exact1DSolution::breakpoints)
      .def_property_readonly("kind",
                             [](const Exact1DSolution& s) { return kind_name(s.kind); })
      .def("__call__", &Exact1DSolution::eval);

  m.def("solve_1d_exact", &solve_1d_exact, py::arg("G"), py::arg("lam"), py::arg("a"),
        py::arg("b"));

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("u", &SolveResult::u)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("final_energy", &SolveResult::final_energy);

  m.def("minimize",
        [](const PhiFunction& phi, double lam, const Field& boundary, std::uint64_t seed) {
          SolveOptions opt;
          opt.seed = seed;
          return minimize(Functional{phi, lam}, boundary, opt);
        },
        py::arg("phi"), py::arg("lam"), py::arg("boundary"), py::arg("seed") = 0x5EEDULL);

  m.def("energy",
        [](const PhiFunction& phi, double lam, const Field& u) {
          return energy(Functional{phi, lam}, u);
        },
        py::arg("phi"), py::arg("lam"), py::arg("u"));

  py::class_<RegularizedPhi>(m, "RegularizedPhi")
      .def_readonly("p", &RegularizedPhi::p)
      .def_readonly("q", &RegularizedPhi::q)
      .def_readonly("c_cmp", &RegularizedPhi::c_cmp)
      .def_readonly("power_law", &RegularizedPhi::power_law)
      .def("eval", [](const RegularizedPhi& r, double t) { return r.eval(t); })
      .def("deriv", [](const RegularizedPhi& r, double t) { return r.deriv(t); })
      .def("dslope", [](const RegularizedPhi& r, double t) { return r.dslope(t); });

  m.def("regularize",
        [](const PhiFunction& phi, const Grid& g, const Ball& b) {
          return regularize(phi, g, b);
        },
        py::arg("phi"), py::arg("grid"), py::arg("ball"));

  m.def("harmonic_replacement",
        [](const RegularizedPhi& reg, const Field& u, const Ball& b) {
          return harmonic_replacement(reg, u, b);
        },
        py::arg("reg"), py::arg("u"), py::arg("ball"));

  py::class_<EstimateRow>(m, "EstimateRow")
      .def_readonly("key", &EstimateRow::key)
      .def_readonly("r", &EstimateRow::r)
      .def_readonly("lhs", &EstimateRow::lhs)
      .def_readonly("rhs", &EstimateRow::rhs)
      .def_readonly("ratio", &EstimateRow::ratio)
      .def_readonly("pass_", &EstimateRow::pass)
      .def_readonly("note", &EstimateRow::note);

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("name", &EstimateReport::name)
      .def_readonly("family", &EstimateReport::family)
      .def_readonly("h", &EstimateReport::h)
      .def_readonly("rows", &EstimateReport::rows)
      .def_readonly("fitted_exponent", &EstimateReport::fitted_exponent)
      .def_readonly("fit_residual", &EstimateReport::fit_residual)
      .def_readonly("has_fit", &EstimateReport::has_fit)
      .def_readonly("pass_", &EstimateReport::pass);

  m.def("caccioppoli_ratio",
        [](const PhiFunction& phi, double lam, const Field& u, const std::vector<Ball>& balls) {
          return caccioppoli_ratio(Functional{phi, lam}, u, balls);
        },
        py::arg("phi"), py::arg("lam"), py::arg("u"), py::arg("balls"));
  m.def("reverse_holder",
        [](const PhiFunction& phi, double lam, const Field& u, const std::vector<Ball>& balls,
           double s0, double t) { return reverse_holder(Functional{phi, lam}, u, balls, s0, t); },
        py::arg("phi"), py::arg("lam"), py::arg("u"), py::arg("balls"), py::arg("s0") = 0.1,
        py::arg("t") = 1.0);
  m.def("comparison_estimate",
        [](const PhiFunction& phi, double lam, const Field& u, const std::vector<Ball>& balls,
           double beta, double s0) {
          return comparison_estimate(Functional{phi, lam}, u, balls, beta, s0);
        },
        py::arg("phi"), py::arg("lam"), py::arg("u"), py::arg("balls"), py::arg("beta") = 1.0,
        py::arg("s0") = 0.1);
  m.def("poincare_check",
        [](const PhiFunction& phi, double lam, const Field& u, const std::vector<Ball>& balls,
           double s) { return poincare_check(Functional{phi, lam}, u, balls, s); },
        py::arg("phi"), py::arg("lam"), py::arg("u"), py::arg("balls"), py::arg("s") = 1.0);
  m.def("growth_dichotomy",
        [](const Field& u, const Vec2& x0, int k_max, double M) {
          return growth_dichotomy(u, x0, k_max, M);
        },
        py::arg("u"), py::arg("x0"), py::arg("k_max"), py::arg("M") = 1.0);
  m.def("lipschitz_certificate",
        [](const Field& uh, const Field& uh2, const Ball& region, double lip_tol) {
          return lipschitz_certificate(uh, uh2, region, lip_tol);
        },
        py::arg("u_h"), py::arg("u_h2"), py::arg("region"), py::arg("lip_tol") = 0.10);
  m.def("free_boundary_points", &free_boundary_points, py::arg("u"));

  py::class_<RecessionReport>(m, "RecessionReport")
      .def_readonly("tgrid", &RecessionReport::tgrid)
      .def_readonly("sup_increments", &RecessionReport::sup_increments)
      .def_readonly("convex", &RecessionReport::convex)
      .def_readonly("slopes_ok", &RecessionReport::slopes_ok)
      .def_readonly("limit", &RecessionReport::limit);

  m.def("recession_limit",
        [](const PhiFunction& phi, int jmax) {
          return recession_limit(phi, default_sigmas(jmax));
        },
        py::arg("phi"), py::arg("jmax") = 40);

  py::class_<BlowupRun>(m, "BlowupRun")
      .def_readonly("el_residual", &BlowupRun::el_residual)
      .def_readonly("sup_increment", &BlowupRun::sup_increment)
      .def_readonly("report", &BlowupRun::report);

  m.def("blowup_run",
        [](const PhiFunction& phi, double lam, const Field& u, const Vec2& x0, int j_max,
           int probe_n) { return blowup_run(Functional{phi, lam}, u, x0, j_max, probe_n); },
        py::arg("phi"), py::arg("lam"), py::arg("u"), py::arg("x0"), py::arg("j_max"),
        py::arg("probe_n") = 33);

  m.def("run_config",
        [](const std::string& text, const std::string& out_dir, bool strict, bool solve_only) {
          ExperimentConfig cfg = parse_config(text);
          RunnerOptions opt;
          opt.out_dir = out_dir;
          opt.config_text = text;
          opt.strict = strict;
          opt.solve_only = solve_only;
          RunResult res = run_experiment(cfg, opt);
          py::dict d;
          d["out_dir"] = res.out_dir;
          d["hash"] = res.hash;
          d["solver_ok"] = res.solver_ok;
          d["suite_pass"] = res.suite_pass;
          d["exit_code"] = res.exit_code(strict);
          return d;
        },
        py::arg("config_text"), py::arg("out_dir") = std::string(), py::arg("strict") = false,
        py::arg("solve_only") = false);
}
