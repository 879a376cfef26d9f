#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "acfb/blowup.hpp"
#include "acfb/conditions.hpp"
#include "acfb/csv.hpp"
#include "acfb/expr.hpp"
#include "acfb/runner.hpp"

namespace {

using namespace acfb;

constexpr int kExitPass = 0;
constexpr int kExitSuiteFail = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  bool strict = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<int> resolutions;
};

void add_common(CLI::App* sub, CommonArgs& a, bool need_config = true) {
  auto* copt = sub->add_option("-c,--config", a.config_path, "experiment JSON");
  if (need_config) copt->required();
  copt->check(CLI::ExistingFile);
  sub->add_option("-o,--out", a.out_dir, "output directory (overrides the config)");
  sub->add_flag("--strict", a.strict, "solver nonconvergence becomes an error");
  sub->add_option("--seed", a.seed, "RNG seed (overrides the config)")
      ->each([&](const std::string&) { a.seed_set = true; });
  sub->add_option("--resolutions", a.resolutions, "node counts (override the config)");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_with_overrides(const CommonArgs& a, std::string* text_out) {
  std::string text = slurp(a.config_path);
  if (text_out) *text_out = text;
  ExperimentConfig cfg = parse_config(text);
  if (a.seed_set) {
    cfg.seed = a.seed;
    cfg.solve.seed = a.seed;
  }
  if (!a.resolutions.empty()) {
    for (int n : a.resolutions)
      if (n < 3 || ((n - 1) & (n - 2)) != 0)
        throw std::runtime_error("--resolutions entries need n = 2^k + 1, got " +
                                 std::to_string(n));
    cfg.resolutions = a.resolutions;
  }
  return cfg;
}

void print_pass_lines(const RunResult& res) {
  for (const ResolutionRun& rr : res.resolutions) {
    std::printf("n=%d  solver %s  energy %.12g\n", rr.n,
                rr.solve.converged ? "converged" : "NOT CONVERGED", rr.solve.final_energy);
    for (const EstimateReport& rep : rr.reports)
      std::printf("  [%s] %s\n", rep.pass ? "pass" : "FAIL", rep.name.c_str());
  }
  for (const std::string& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int cmd_solve(const CommonArgs& a) {
  std::string text;
  ExperimentConfig cfg = load_with_overrides(a, &text);
  RunnerOptions opt;
  opt.out_dir = a.out_dir;
  opt.config_text = text;
  opt.strict = a.strict;
  opt.solve_only = true;
  RunResult res = run_experiment(cfg, opt);
  print_pass_lines(res);
  std::printf("wrote %s\n", res.manifest_path.c_str());
  return a.strict && !res.solver_ok ? kExitSolver : kExitPass;
}

int cmd_verify(const CommonArgs& a) {
  std::string text;
  ExperimentConfig cfg = load_with_overrides(a, &text);
  RunnerOptions opt;
  opt.out_dir = a.out_dir;
  opt.config_text = text;
  opt.strict = a.strict;
  RunResult res = run_experiment(cfg, opt);
  print_pass_lines(res);
  std::printf("suite %s, manifest %s\n", res.suite_pass ? "pass" : "FAIL",
              res.manifest_path.c_str());
  return res.exit_code(a.strict);
}

Ball parse_ball(const std::string& s, int dim) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) parts.push_back(std::stod(tok));
  if (dim == 1 && parts.size() == 2) return {{parts[0], 0.0}, parts[1]};
  if (dim == 2 && parts.size() == 3) return {{parts[0], parts[1]}, parts[2]};
  throw std::runtime_error(dim == 1 ? "--ball wants c,r in 1d" : "--ball wants cx,cy,r in 2d");
}

Vec2 parse_point(const std::string& s, int dim) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) parts.push_back(std::stod(tok));
  if (dim == 1 && parts.size() == 1) return {parts[0], 0.0};
  if (dim == 2 && parts.size() == 2) return {parts[0], parts[1]};
  throw std::runtime_error("--x0 wants one coordinate per dimension");
}

Field field_for(const ExperimentConfig& cfg, const std::string& field_path) {
  if (!field_path.empty()) return load_field(field_path);
  Grid g = cfg.dim == 1 ? Grid::line(cfg.lo[0], cfg.hi[0], cfg.resolutions.front())
                        : Grid::box(cfg.lo[0], cfg.hi[0], cfg.lo[1], cfg.hi[1],
                                    cfg.resolutions.front(), cfg.resolutions.front());
  Expr e = Expr::parse(cfg.boundary);
  Field bdry = Field::from_function(g, [&](Vec2 x) { return e.eval(x.x1, x.x2); });
  Functional fn{cfg.phi, cfg.lambda};
  SolveResult sr = minimize(fn, bdry, cfg.solve);
  return sr.u;
}

int cmd_replace(const CommonArgs& a, const std::string& field_path,
                const std::string& ball_spec) {
  ExperimentConfig cfg = load_with_overrides(a, nullptr);
  Ball b = parse_ball(ball_spec, cfg.dim);
  Field u = field_for(cfg, field_path);
  RegularizedPhi reg = regularize(cfg.phi, u.grid, b, {});
  ReplaceStats st;
  Field v = harmonic_replacement(reg, u, b, {}, &st);
  std::string out = a.out_dir.empty() ? "." : a.out_dir;
  std::filesystem::create_directories(out);
  save_field(v, out + "/replacement.bin");
  save_field_csv(v, out + "/replacement.csv");
  std::printf("replacement on ball r=%g: outer=%d cg=%d residual=%.3g %s\n", b.radius,
              st.outer_iterations, st.cg_iterations, st.residual,
              st.converged ? "converged" : "NOT CONVERGED");
  std::printf("wrote %s/replacement.bin\n", out.c_str());
  if (!st.converged && a.strict) return kExitSolver;
  return kExitPass;
}

int cmd_blowup(const CommonArgs& a, const std::string& field_path, const std::string& x0_spec,
               int jmax) {
  ExperimentConfig cfg = load_with_overrides(a, nullptr);
  Field u = field_for(cfg, field_path);
  Vec2 x0;
  if (!x0_spec.empty()) {
    x0 = parse_point(x0_spec, cfg.dim);
  } else {
    std::vector<int> fb = free_boundary_points(u);
    x0 = fb.empty() ? Vec2{0.5 * (cfg.lo[0] + cfg.hi[0]), 0.5 * (cfg.lo[1] + cfg.hi[1])}
                    : u.grid.node(fb.front());
    std::printf("x0 = (%g, %g) (%s)\n", x0.x1, x0.x2,
                fb.empty() ? "domain center" : "first free boundary point");
  }
  Functional fn{cfg.phi, cfg.lambda};
  BlowupRun run = blowup_run(fn, u, x0, jmax > 0 ? jmax : cfg.est.blowup_jmax,
                             cfg.est.blowup_probe_n);
  CsvTable t = report_to_csv(run.report);
  std::string out = a.out_dir.empty() ? "." : a.out_dir;
  std::filesystem::create_directories(out);
  save_csv(t, out + "/blowup.csv");
  std::fputs(render_text_table(t).c_str(), stdout);
  std::printf("recession limit %s, wrote %s/blowup.csv\n",
              run.phi_inf.autonomous() ? "anchored" : "varying", out.c_str());
  return run.report.pass ? kExitPass : kExitSuiteFail;
}

int cmd_report(const std::vector<std::string>& manifests, const std::string& out_path) {
  CsvTable merged = consolidate_manifests(manifests);
  if (!out_path.empty()) {
    save_csv(merged, out_path);
    std::printf("wrote %s\n", out_path.c_str());
  }
  std::fputs(render_text_table(merged).c_str(), stdout);
  return kExitPass;
}

int cmd_check_phi(const CommonArgs& a) {
  ExperimentConfig cfg = load_with_overrides(a, nullptr);
  int n = std::min(cfg.resolutions.front(), 129);
  Grid g = cfg.dim == 1 ? Grid::line(cfg.lo[0], cfg.hi[0], n)
                        : Grid::box(cfg.lo[0], cfg.hi[0], cfg.lo[1], cfg.hi[1], n, n);
  const GrowthEnvelope& env = cfg.phi.env;
  std::vector<Ball> balls = cfg.est.balls;
  if (balls.empty()) {
    Vec2 c{0.5 * (cfg.lo[0] + cfg.hi[0]), 0.5 * (cfg.lo[1] + cfg.hi[1])};
    balls = {{c, 0.05}, {c, 0.1}, {c, 0.2}};
  }

  struct Line {
    const char* name;
    ConditionVerdict v;
  };
  std::vector<Line> lines = {
      {"inc_p", check_inc(cfg.phi, g, env.p)},
      {"dec_q", check_dec(cfg.phi, g, env.q)},
      {"A0", check_A0(cfg.phi, g, env.L)},
      {"VA1", check_VA1(cfg.phi, g, env.omega, balls)},
      {"sandwich", check_sandwich(cfg.phi, g)},
  };
  bool all = true;
  for (const Line& l : lines) {
    std::printf("[%s] %-8s worst=%.3g%s%s\n", l.v.pass ? "pass" : "FAIL", l.name, l.v.worst,
                l.v.where.empty() ? "" : " at ", l.v.where.c_str());
    all = all && l.v.pass;
  }
  return all ? kExitPass : kExitSuiteFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete minimizers and regularity checks for generalized Orlicz functionals"};
  app.require_subcommand(1);

  CommonArgs solve_args, verify_args, replace_args, blowup_args, check_args;
  std::string replace_field, replace_ball, blowup_field, blowup_x0;
  int blowup_jmax = 0;
  std::vector<std::string> report_manifests;
  std::string report_out;

  CLI::App* solve = app.add_subcommand("solve", "minimize at each configured resolution");
  add_common(solve, solve_args);

  CLI::App* verify = app.add_subcommand("verify", "solve plus the configured estimate suite");
  add_common(verify, verify_args);

  CLI::App* replace = app.add_subcommand("replace", "harmonic replacement on a ball");
  add_common(replace, replace_args);
  replace->add_option("--field", replace_field, "field snapshot (.bin); solves when absent")
      ->check(CLI::ExistingFile);
  replace->add_option("--ball", replace_ball, "cx,cy,r (c,r in 1d)")->required();

  CLI::App* blowup = app.add_subcommand("blowup", "blow-up sequence at a point");
  add_common(blowup, blowup_args);
  blowup->add_option("--field", blowup_field, "field snapshot (.bin); solves when absent")
      ->check(CLI::ExistingFile);
  blowup->add_option("--x0", blowup_x0, "center (defaults to a free boundary point)");
  blowup->add_option("--jmax", blowup_jmax, "number of dyadic scales");

  CLI::App* report = app.add_subcommand("report", "merge run manifests into one table");
  report->add_option("manifests", report_manifests, "manifest.json paths");
  report->add_option("-o,--out", report_out, "write the merged CSV here");

  CLI::App* check = app.add_subcommand("check-phi", "structural checks on the integrand");
  add_common(check, check_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitValidation;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (replace->parsed()) return cmd_replace(replace_args, replace_field, replace_ball);
    if (blowup->parsed()) return cmd_blowup(blowup_args, blowup_field, blowup_x0, blowup_jmax);
    if (report->parsed()) return cmd_report(report_manifests, report_out);
    if (check->parsed()) return cmd_check_phi(check_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
