#include "acfb/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "acfb/almost_min.hpp"
#include "acfb/blowup.hpp"
#include "acfb/expr.hpp"

#include "json.hpp"

namespace acfb {
namespace {

using json = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// CSV cells may not contain separators; exception text can.
std::string sanitize_note(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Grid make_grid(const ExperimentConfig& cfg, int n) {
  if (cfg.dim == 1) return Grid::line(cfg.lo[0], cfg.hi[0], n);
  return Grid::box(cfg.lo[0], cfg.hi[0], cfg.lo[1], cfg.hi[1], n, n);
}

Field boundary_field(const ExperimentConfig& cfg, const Grid& g) {
  Expr e = Expr::parse(cfg.boundary);
  return Field::from_function(g, [&](Vec2 x) { return e.eval(x.x1, x.x2); });
}

EstimateReport error_report(const std::string& name, const ExperimentConfig& cfg, double h,
                            const std::string& what) {
  EstimateReport rep;
  rep.name = name;
  rep.family = family_name(cfg.phi.family);
  rep.h = h;
  rep.lambda = cfg.lambda;
  EstimateRow row;
  row.key = "error";
  row.pass = false;
  row.note = sanitize_note(what);
  rep.rows.push_back(row);
  rep.pass = false;
  return rep;
}

EstimateReport note_report(const std::string& name, const ExperimentConfig& cfg, double h,
                           const std::string& note) {
  EstimateReport rep;
  rep.name = name;
  rep.family = family_name(cfg.phi.family);
  rep.h = h;
  rep.lambda = cfg.lambda;
  EstimateRow row;
  row.key = "skip";
  row.note = sanitize_note(note);
  rep.rows.push_back(row);
  return rep;
}

// Ops invoked without a Functional leave family/lambda blank; the CSV
// contract wants every row tagged.
void backfill(EstimateReport& rep, const ExperimentConfig& cfg) {
  if (rep.family.empty()) rep.family = family_name(cfg.phi.family);
  if (rep.lambda == 0.0) rep.lambda = cfg.lambda;
}

EstimateReport wrap_holder(const ExperimentConfig& cfg, const Field& u) {
  const EstimateSuiteConfig& est = cfg.est;
  double sem = holder_seminorm(u, est.holder_alpha, est.holder_region, est.holder_budget,
                               cfg.seed);
  CellField mag = gradient(u).magnitude();
  double supg = 0.0;
  for (double m : mag.v) supg = std::max(supg, m);
  double diam = 2.0 * est.holder_region.radius;
  double cap = std::sqrt(double(u.grid.dim)) * supg * std::pow(diam, 1.0 - est.holder_alpha);

  EstimateReport rep;
  rep.name = "holder";
  rep.h = u.grid.h[0];
  EstimateRow row;
  row.key = "seminorm";
  row.r = est.holder_region.radius;
  row.lhs = sem;
  row.rhs = cap;
  row.ratio = cap > 0.0 ? sem / cap : 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "alpha=%g", est.holder_alpha);
  row.note = buf;
  rep.rows.push_back(row);
  return rep;
}

EstimateReport wrap_maximal(const ExperimentConfig& cfg, const Field& u) {
  double rmax = cfg.est.maximal_rmax > 0.0 ? cfg.est.maximal_rmax : 16.0 * u.grid.h[0];
  CellField f = gradient(u).magnitude();
  CellField M = maximal_function(f, rmax);
  double supf = 0.0, supM = 0.0, meanf = 0.0, meanM = 0.0;
  for (double x : f.v) {
    supf = std::max(supf, x);
    meanf += x;
  }
  for (double x : M.v) {
    supM = std::max(supM, x);
    meanM += x;
  }
  meanf /= double(f.v.size());
  meanM /= double(M.v.size());

  EstimateReport rep;
  rep.name = "maximal";
  rep.h = u.grid.h[0];
  EstimateRow sup_row{"sup", rmax, supM, supf, supf > 0.0 ? supM / supf : 0.0, true, ""};
  EstimateRow mean_row{"mean", rmax, meanM, meanf, meanf > 0.0 ? meanM / meanf : 0.0, true, ""};
  rep.rows = {sup_row, mean_row};
  return rep;
}

EstimateReport wrap_almost_min(const ExperimentConfig& cfg, const Functional& fn,
                               const Field& u) {
  AlmostMinCert cert = check_almost_min(fn, u, cfg.kappa, cfg.beta, cfg.est.balls);
  EstimateReport rep;
  rep.name = "almost_min";
  rep.family = family_name(fn.phi.family);
  rep.h = u.grid.h[0];
  rep.lambda = fn.lambda;
  for (const CompetitorRow& c : cert.rows) {
    // Merged tables key rows on (name, key, r); balls may share a radius,
    // so the key has to carry which ball the competitor lived on.
    std::size_t bi = 0;
    while (bi + 1 < cert.balls.size() &&
           (cert.balls[bi].center.x1 != c.ball.center.x1 ||
            cert.balls[bi].center.x2 != c.ball.center.x2 ||
            cert.balls[bi].radius != c.ball.radius))
      ++bi;
    EstimateRow row;
    row.key = "b" + std::to_string(bi) + ":" + c.competitor;
    row.r = c.ball.radius;
    row.lhs = c.energy_u;
    row.rhs = c.energy_w;
    row.ratio = c.ratio;
    row.pass = c.pass;
    char buf[64];
    std::snprintf(buf, sizeof buf, "bound=%.6g", c.bound);
    row.note = buf;
    rep.rows.push_back(row);
    rep.pass = rep.pass && c.pass;
  }
  return rep;
}

// Detected free-boundary nodes come back in raster order, which puts border
// nodes first on the bundled domains; probes anchored there have no room.
// Take the interior point nearest the domain center (raster order breaks
// ties), falling back to the raw front if everything sits on the border.
Vec2 fb_anchor(const std::vector<int>& fb, const Grid& g, const ExperimentConfig& cfg) {
  Vec2 c{0.5 * (cfg.lo[0] + cfg.hi[0]),
         cfg.dim == 2 ? 0.5 * (cfg.lo[1] + cfg.hi[1]) : 0.0};
  int best = -1;
  double best_d = 0.0;
  for (int idx : fb) {
    if (g.on_border(idx % g.n[0], idx / g.n[0])) continue;
    double d = dist(g.node(idx), c);
    if (best < 0 || d < best_d) {
      best = idx;
      best_d = d;
    }
  }
  return g.node(best >= 0 ? best : fb.front());
}

std::vector<EstimateReport> dispatch(const std::string& which, const ExperimentConfig& cfg,
                                     const Functional& fn, const Field& u) {
  const EstimateSuiteConfig& est = cfg.est;
  std::vector<EstimateReport> out;
  if (which == "caccioppoli") {
    out.push_back(caccioppoli_ratio(fn, u, est.balls));
  } else if (which == "reverse_holder") {
    out.push_back(reverse_holder(fn, u, est.balls, est.s0, est.t));
  } else if (which == "comparison") {
    out.push_back(comparison_estimate(fn, u, est.comparison_balls, est.beta, est.s0));
  } else if (which == "poincare") {
    out.push_back(poincare_check(fn, u, est.balls, est.poincare_s));
  } else if (which == "morrey") {
    std::vector<double> radii = est.decay_radii;
    if (radii.empty()) radii = {0.04, 0.08, 0.16, 0.32};
    out.push_back(morrey_decay(u, est.decay_center, radii, est.morrey_sigma));
  } else if (which == "holder") {
    out.push_back(wrap_holder(cfg, u));
  } else if (which == "growth") {
    std::vector<int> fb = free_boundary_points(u);
    if (fb.empty()) {
      out.push_back(note_report("growth_dichotomy", cfg, u.grid.h[0], "no free boundary point"));
    } else {
      out.push_back(growth_dichotomy(u, fb_anchor(fb, u.grid, cfg), est.growth_kmax));
    }
  } else if (which == "maximal") {
    out.push_back(wrap_maximal(cfg, u));
  } else if (which == "blowup") {
    std::vector<int> fb = free_boundary_points(u);
    Vec2 x0 = fb.empty() ? Vec2{0.5 * (cfg.lo[0] + cfg.hi[0]), 0.5 * (cfg.lo[1] + cfg.hi[1])}
                         : fb_anchor(fb, u.grid, cfg);
    BlowupRun run = blowup_run(fn, u, x0, est.blowup_jmax, est.blowup_probe_n);
    out.push_back(run.report);
  } else if (which == "almost_min") {
    out.push_back(wrap_almost_min(cfg, fn, u));
  } else if (which == "lipschitz") {
    // cross-resolution, handled by the caller
  } else {
    throw std::runtime_error("unknown estimate '" + which + "'");
  }
  for (EstimateReport& rep : out) backfill(rep, cfg);
  return out;
}

json stage_to_json(const StageLog& s) {
  json j;
  j["level_n"] = s.level_n;
  j["eps"] = s.eps;
  j["delta"] = s.delta;
  j["iterations"] = s.iterations;
  j["smoothed_energy"] = s.smoothed_energy;
  j["exact_energy"] = s.exact_energy;
  return j;
}

}  // namespace

int RunResult::exit_code(bool strict) const {
  if (strict && !solver_ok) return 3;
  return suite_pass ? 0 : 1;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunnerOptions& opt) {
  namespace fs = std::filesystem;
  RunResult res;
  res.out_dir = opt.out_dir.empty() ? cfg.out_dir : opt.out_dir;
  if (!opt.config_text.empty()) res.hash = config_hash(opt.config_text);
  fs::create_directories(res.out_dir);

  Functional fn{cfg.phi, cfg.lambda};
  std::map<std::string, double> walls;
  auto t_total = clock_type::now();

  for (int n : cfg.resolutions) {
    ResolutionRun rr;
    rr.n = n;
    Grid g = make_grid(cfg, n);
    rr.h = g.h[0];
    Field bdry = boundary_field(cfg, g);

    auto t_solve = clock_type::now();
    rr.solve = minimize(fn, bdry, cfg.solve);
    walls["solve_" + std::to_string(n)] = seconds_since(t_solve);
    if (!rr.solve.converged) {
      res.solver_ok = false;
      res.warnings.push_back("solver did not meet its stage tolerance at n=" +
                             std::to_string(n));
    }

    std::string stem = res.out_dir + "/u_" + std::to_string(n);
    rr.field_path = stem + ".bin";
    rr.field_csv_path = stem + ".csv";
    rr.solve_record_path = res.out_dir + "/solve_" + std::to_string(n) + ".json";
    rr.estimates_csv_path = res.out_dir + "/estimates_" + std::to_string(n) + ".csv";
    save_field(rr.solve.u, rr.field_path);
    save_field_csv(rr.solve.u, rr.field_csv_path);

    {
      json rec;
      rec["name"] = cfg.name;
      rec["config_hash"] = hash_hex(res.hash);
      rec["n"] = n;
      rec["h"] = rr.h;
      rec["seed"] = cfg.seed;
      rec["converged"] = rr.solve.converged;
      rec["final_energy"] = rr.solve.final_energy;
      rec["polish_accepted"] = rr.solve.polish_accepted;
      rec["truncations_accepted"] = rr.solve.truncations_accepted;
      rec["stages"] = json::array();
      for (const StageLog& s : rr.solve.stages) rec["stages"].push_back(stage_to_json(s));
      std::ofstream out(rr.solve_record_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + rr.solve_record_path);
      out << rec.dump(2) << "\n";
    }

    if (!opt.solve_only) {
      auto t_est = clock_type::now();
      for (const std::string& which : cfg.est.suite) {
        try {
          for (EstimateReport& rep : dispatch(which, cfg, fn, rr.solve.u))
            rr.reports.push_back(std::move(rep));
        } catch (const std::exception& e) {
          rr.reports.push_back(error_report(which, cfg, rr.h, e.what()));
        }
      }
      walls["estimates_" + std::to_string(n)] = seconds_since(t_est);
    }
    res.resolutions.push_back(std::move(rr));
  }

  bool want_lip = !opt.solve_only &&
                  std::find(cfg.est.suite.begin(), cfg.est.suite.end(), "lipschitz") !=
                      cfg.est.suite.end();
  if (want_lip) {
    if (res.resolutions.size() < 2) {
      res.resolutions.back().reports.push_back(note_report(
          "lipschitz", cfg, res.resolutions.back().h, "needs two resolutions"));
    } else {
      for (std::size_t i = 0; i + 1 < res.resolutions.size(); ++i) {
        ResolutionRun& coarse = res.resolutions[i];
        ResolutionRun& fine = res.resolutions[i + 1];
        try {
          EstimateReport rep = lipschitz_certificate(coarse.solve.u, fine.solve.u,
                                                     cfg.est.lip_region, cfg.est.lip_tol);
          backfill(rep, cfg);
          fine.reports.push_back(std::move(rep));
        } catch (const std::exception& e) {
          fine.reports.push_back(error_report("lipschitz", cfg, fine.h, e.what()));
        }
      }
    }
  }

  for (ResolutionRun& rr : res.resolutions) {
    if (opt.solve_only) continue;
    std::vector<CsvTable> tables;
    for (const EstimateReport& rep : rr.reports) {
      tables.push_back(report_to_csv(rep));
      res.suite_pass = res.suite_pass && rep.pass;
    }
    save_csv(merge_tables(tables), rr.estimates_csv_path);
  }
  walls["total"] = seconds_since(t_total);

  // Per-suite-entry verdicts, AND over resolutions.
  std::map<std::string, bool> verdicts;
  if (!opt.solve_only) {
    std::map<std::string, std::string> op_to_suite = {{"growth_dichotomy", "growth"}};
    for (const ResolutionRun& rr : res.resolutions)
      for (const EstimateReport& rep : rr.reports) {
        std::string key = rep.name;
        auto it = op_to_suite.find(key);
        if (it != op_to_suite.end()) key = it->second;
        auto [slot, fresh] = verdicts.emplace(key, rep.pass);
        if (!fresh) slot->second = slot->second && rep.pass;
      }
  }

  res.summary_path = res.out_dir + "/summary.json";
  {
    json sum;
    sum["name"] = cfg.name;
    sum["family"] = family_name(cfg.phi.family);
    sum["config_hash"] = hash_hex(res.hash);
    sum["suite_pass"] = res.suite_pass;
    sum["resolutions"] = json::array();
    for (const ResolutionRun& rr : res.resolutions) {
      json jr;
      jr["n"] = rr.n;
      jr["h"] = rr.h;
      jr["converged"] = rr.solve.converged;
      jr["final_energy"] = rr.solve.final_energy;
      json je = json::object();
      for (const EstimateReport& rep : rr.reports) je[rep.name] = rep.pass;
      jr["estimates"] = je;
      sum["resolutions"].push_back(jr);
    }
    std::ofstream out(res.summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + res.summary_path);
    out << sum.dump(2) << "\n";
  }

  res.manifest_path = res.out_dir + "/manifest.json";
  {
    json man;
    man["name"] = cfg.name;
    man["family"] = family_name(cfg.phi.family);
    man["lambda"] = cfg.lambda;
    man["config_hash"] = hash_hex(res.hash);
    man["seed"] = cfg.seed;
    man["resolutions"] = cfg.resolutions;
    json art;
    json fields = json::array(), fcsv = json::array(), recs = json::array(),
         ecsv = json::array();
    for (const ResolutionRun& rr : res.resolutions) {
      fields.push_back(fs::path(rr.field_path).filename().string());
      fcsv.push_back(fs::path(rr.field_csv_path).filename().string());
      recs.push_back(fs::path(rr.solve_record_path).filename().string());
      if (!opt.solve_only)
        ecsv.push_back(fs::path(rr.estimates_csv_path).filename().string());
    }
    art["fields"] = fields;
    art["field_csvs"] = fcsv;
    art["solve_records"] = recs;
    art["estimate_csvs"] = ecsv;
    art["summary"] = "summary.json";
    man["artifacts"] = art;
    json pass;
    pass["solver"] = res.solver_ok;
    pass["suite"] = res.suite_pass;
    for (const auto& [k, v] : verdicts) pass[k] = v;
    man["pass"] = pass;
    json jw = json::object();
    for (const auto& [k, v] : walls) jw[k] = v;
    man["wall_seconds"] = jw;
    if (!res.warnings.empty()) man["warnings"] = res.warnings;
    std::ofstream out(res.manifest_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + res.manifest_path);
    out << man.dump(2) << "\n";
  }
  return res;
}

CsvTable consolidate_manifests(const std::vector<std::string>& manifest_paths) {
  namespace fs = std::filesystem;
  std::vector<CsvTable> tables;
  for (const std::string& mp : manifest_paths) {
    std::ifstream in(mp, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + mp);
    json man = json::parse(in);
    if (!man.contains("artifacts") || !man["artifacts"].contains("estimate_csvs"))
      throw std::runtime_error(mp + ": no estimate artifacts listed");
    fs::path base = fs::path(mp).parent_path();
    for (const json& rel : man["artifacts"]["estimate_csvs"])
      tables.push_back(load_csv((base / rel.get<std::string>()).string()));
  }
  return merge_tables(tables);
}

}  // namespace acfb
