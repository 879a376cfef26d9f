#include "acfb/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace acfb {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("config: " + what); }

double need_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) fail("field '" + key + "' must be a number");
  return j[key].get<double>();
}

Coefficient coefficient_from(const json& j, const std::string& key) {
  if (j.is_number()) return Coefficient::constant(j.get<double>());
  if (j.is_string()) return Coefficient::expression(j.get<std::string>());
  fail("coefficient '" + key + "' must be a number or an expression string");
}

GrowthEnvelope envelope_from(const json& j) {
  GrowthEnvelope env;
  env.p = need_number(j, "p");
  env.q = need_number(j, "q");
  env.L = j.contains("L") ? need_number(j, "L") : 1.0;
  if (j.contains("omega")) {
    const json& w = j["omega"];
    env.omega.C = need_number(w, "C");
    env.omega.theta = need_number(w, "theta");
  } else {
    env.omega.C = 0.0;
  }
  if (!(env.p > 1.0)) fail("envelope p must be > 1");
  if (!(env.q >= env.p)) fail("envelope q must be >= p");
  if (!(env.L >= 1.0)) fail("envelope L must be >= 1");
  return env;
}

json envelope_to(const GrowthEnvelope& env) {
  json j;
  j["p"] = env.p;
  j["q"] = env.q;
  j["L"] = env.L;
  j["omega"] = {{"C", env.omega.C}, {"theta", env.omega.theta}};
  return j;
}

json coefficient_to(const Coefficient& c) {
  if (c.is_const) return json(c.value);
  return json(c.expr.source());
}

PhiFunction phi_from(const json& j) {
  if (!j.contains("family") || !j["family"].is_string()) fail("phi.family must be a string");
  std::string fam = j["family"].get<std::string>();
  const json params = j.contains("params") ? j["params"] : json::object();
  if (fam == "power_law") return PhiFunction::power_law(need_number(params, "p"));
  GrowthEnvelope env = j.contains("envelope") ? envelope_from(j["envelope"]) : GrowthEnvelope{};
  if (fam == "perturbed_orlicz") {
    if (!params.contains("a")) fail("perturbed_orlicz needs params.a");
    return PhiFunction::perturbed_orlicz(need_number(params, "p"),
                                         coefficient_from(params["a"], "a"), env);
  }
  if (fam == "variable_exponent") {
    if (!params.contains("p")) fail("variable_exponent needs params.p");
    return PhiFunction::variable_exponent(coefficient_from(params["p"], "p"), env);
  }
  if (fam == "double_phase") {
    if (!params.contains("a")) fail("double_phase needs params.a");
    return PhiFunction::double_phase(need_number(params, "p"), need_number(params, "q"),
                                     coefficient_from(params["a"], "a"), env);
  }
  if (fam == "tabulated") {
    if (!params.contains("t") || !params.contains("v")) fail("tabulated needs params.t and params.v");
    return PhiFunction::tabulated(params["t"].get<std::vector<double>>(),
                                  params["v"].get<std::vector<double>>(), env);
  }
  fail("unknown phi family '" + fam + "'");
}

json phi_to(const PhiFunction& phi) {
  json j;
  j["family"] = family_name(phi.family);
  json params;
  switch (phi.family) {
    case PhiFamily::PowerLaw: params["p"] = phi.p; break;
    case PhiFamily::PerturbedOrlicz:
      params["p"] = phi.p;
      params["a"] = coefficient_to(phi.a);
      break;
    case PhiFamily::VariableExponent: params["p"] = coefficient_to(phi.pvar); break;
    case PhiFamily::DoublePhase:
      params["p"] = phi.p;
      params["q"] = phi.q;
      params["a"] = coefficient_to(phi.a);
      break;
    case PhiFamily::Tabulated: {
      std::vector<double> t, v;
      for (std::size_t i = 0; i < phi.tab_logt.size(); ++i) {
        t.push_back(std::pow(10.0, phi.tab_logt[i]));
        v.push_back(std::pow(10.0, phi.tab_logv[i]));
      }
      params["t"] = t;
      params["v"] = v;
      break;
    }
  }
  j["params"] = params;
  if (phi.family != PhiFamily::PowerLaw) j["envelope"] = envelope_to(phi.env);
  return j;
}

Vec2 vec2_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || j.size() > 2) fail("'" + key + "' must be [x1] or [x1,x2]");
  Vec2 v;
  v.x1 = j[0].get<double>();
  v.x2 = j.size() == 2 ? j[1].get<double>() : 0.0;
  return v;
}

Ball ball_from(const json& j, const std::string& key) {
  if (!j.contains("center") || !j.contains("radius")) fail("'" + key + "' needs center and radius");
  Ball b;
  b.center = vec2_from(j["center"], key + ".center");
  b.radius = j["radius"].get<double>();
  if (!(b.radius > 0.0)) fail("'" + key + "' radius must be positive");
  return b;
}

bool dyadic_nodes(int n) {
  int m = n - 1;
  return n >= 3 && (m & (m - 1)) == 0;
}

}  // namespace

const std::vector<std::string>& known_estimates() {
  static const std::vector<std::string> names = {
      "caccioppoli", "reverse_holder", "comparison", "poincare",  "morrey", "holder",
      "growth",      "lipschitz",      "maximal",    "blowup",    "almost_min"};
  return names;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("name") || !j["name"].is_string()) fail("field 'name' must be a string");
  cfg.name = j["name"].get<std::string>();

  if (!j.contains("domain")) fail("missing 'domain'");
  const json& dom = j["domain"];
  cfg.dim = dom.contains("dim") ? dom["dim"].get<int>() : 2;
  if (cfg.dim != 1 && cfg.dim != 2) fail("domain.dim must be 1 or 2");
  Vec2 lo = vec2_from(dom["lo"], "domain.lo");
  Vec2 hi = vec2_from(dom["hi"], "domain.hi");
  cfg.lo = {lo.x1, lo.x2};
  cfg.hi = {hi.x1, hi.x2};
  if (!(cfg.hi[0] > cfg.lo[0]) || (cfg.dim == 2 && !(cfg.hi[1] > cfg.lo[1])))
    fail("domain box must have positive extent");
  if (!dom.contains("resolutions") || !dom["resolutions"].is_array() || dom["resolutions"].empty())
    fail("domain.resolutions must be a nonempty array");
  for (const json& r : dom["resolutions"]) {
    int n = r.get<int>();
    if (!dyadic_nodes(n)) fail("resolution " + std::to_string(n) + " is not dyadic (n = 2^k + 1)");
    cfg.resolutions.push_back(n);
  }

  if (!j.contains("phi")) fail("missing 'phi'");
  cfg.phi = phi_from(j["phi"]);

  cfg.lambda = need_number(j, "lambda");
  if (!(cfg.lambda > 0.0)) fail("lambda must be > 0");

  if (!j.contains("boundary") || !j["boundary"].is_string())
    fail("field 'boundary' must be an expression string");
  cfg.boundary = j["boundary"].get<std::string>();
  Expr::parse(cfg.boundary);  // surface position-tagged errors at load time

  if (j.contains("kappa")) cfg.kappa = need_number(j, "kappa");
  if (j.contains("beta")) cfg.beta = need_number(j, "beta");
  if (!(cfg.kappa >= 0.0)) fail("kappa must be >= 0");
  if (!(cfg.beta > 0.0) || cfg.beta > 1.0) fail("beta must be in (0,1]");

  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.solve.seed = cfg.seed;

  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (s.contains("stages")) cfg.solve.stages = s["stages"].get<int>();
    if (s.contains("max_inner")) cfg.solve.max_inner = s["max_inner"].get<int>();
    if (s.contains("gtol")) cfg.solve.gtol = s["gtol"].get<double>();
    if (s.contains("multilevel")) cfg.solve.multilevel = s["multilevel"].get<bool>();
    if (s.contains("fine_stages")) cfg.solve.fine_stages = s["fine_stages"].get<int>();
    if (s.contains("polish_rounds")) cfg.solve.polish_rounds = s["polish_rounds"].get<int>();
    if (s.contains("eps_min")) cfg.solve.eps_min = s["eps_min"].get<double>();
    if (s.contains("delta_min")) cfg.solve.delta_min = s["delta_min"].get<double>();
    if (!(cfg.solve.gtol > 0.0) || !(cfg.solve.eps_min > 0.0) || !(cfg.solve.delta_min > 0.0))
      fail("solver tolerances must be positive");
    if (cfg.solve.stages < 1) fail("solver.stages must be >= 1");
  }

  cfg.est.beta = cfg.beta;
  if (j.contains("estimates")) {
    const json& e = j["estimates"];
    EstimateSuiteConfig& est = cfg.est;
    if (e.contains("beta")) est.beta = need_number(e, "beta");
    if (e.contains("suite")) {
      for (const json& s : e["suite"]) {
        std::string name = s.get<std::string>();
        const auto& known = known_estimates();
        if (std::find(known.begin(), known.end(), name) == known.end())
          fail("unknown estimate '" + name + "'");
        est.suite.push_back(name);
      }
    }
    if (e.contains("balls"))
      for (const json& b : e["balls"]) est.balls.push_back(ball_from(b, "estimates.balls"));
    if (e.contains("comparison_balls"))
      for (const json& b : e["comparison_balls"])
        est.comparison_balls.push_back(ball_from(b, "estimates.comparison_balls"));
    if (e.contains("s0")) est.s0 = need_number(e, "s0");
    if (e.contains("t")) est.t = need_number(e, "t");
    if (e.contains("poincare_s")) est.poincare_s = need_number(e, "poincare_s");
    if (e.contains("decay_center")) est.decay_center = vec2_from(e["decay_center"], "decay_center");
    if (e.contains("decay_radii"))
      est.decay_radii = e["decay_radii"].get<std::vector<double>>();
    if (e.contains("morrey_sigma")) est.morrey_sigma = need_number(e, "morrey_sigma");
    if (e.contains("holder_alpha")) est.holder_alpha = need_number(e, "holder_alpha");
    if (e.contains("holder_region")) est.holder_region = ball_from(e["holder_region"], "holder_region");
    if (e.contains("holder_budget")) est.holder_budget = e["holder_budget"].get<long long>();
    if (e.contains("growth_kmax")) est.growth_kmax = e["growth_kmax"].get<int>();
    if (e.contains("lip_region")) est.lip_region = ball_from(e["lip_region"], "lip_region");
    if (e.contains("lip_tol")) est.lip_tol = need_number(e, "lip_tol");
    if (e.contains("maximal_rmax")) est.maximal_rmax = need_number(e, "maximal_rmax");
    if (e.contains("blowup_jmax")) est.blowup_jmax = e["blowup_jmax"].get<int>();
    if (e.contains("blowup_probe_n")) est.blowup_probe_n = e["blowup_probe_n"].get<int>();
    if (!(est.s0 > 0.0)) fail("estimates.s0 must be > 0");
  }

  cfg.out_dir = j.contains("out") ? j["out"].get<std::string>() : "runs/" + cfg.name;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  return j.dump();  // key-sorted, whitespace-free
}

std::uint64_t config_hash(const std::string& json_text) {
  std::string canon = canonical_config(json_text);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PhiFunction phi_from_json_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  return phi_from(j);
}

std::string phi_to_json_text(const PhiFunction& phi) { return phi_to(phi).dump(); }

}  // namespace acfb
