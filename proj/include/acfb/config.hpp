#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "acfb/geometry.hpp"
#include "acfb/minimize.hpp"
#include "acfb/phi.hpp"

namespace acfb {

struct EstimateSuiteConfig {
  std::vector<std::string> suite;      // names to run, validated against the registry
  std::vector<Ball> balls;             // outer balls for the ratio estimates
  std::vector<Ball> comparison_balls;  // replacement balls, r <= r0
  double s0 = 0.1;
  double t = 1.0;
  double poincare_s = 1.0;
  double beta = 1.0;
  Vec2 decay_center{0.5, 0.5};
  std::vector<double> decay_radii;
  double morrey_sigma = 0.1;
  double holder_alpha = 0.5;
  Ball holder_region{{0.5, 0.5}, 0.45};
  long long holder_budget = 2000000;
  int growth_kmax = 5;
  Ball lip_region{{0.5, 0.5}, 0.45};
  double lip_tol = 0.10;
  double maximal_rmax = 0.0;  // 0 = 16h at run time
  int blowup_jmax = 6;
  int blowup_probe_n = 33;
};

struct ExperimentConfig {
  std::string name;
  int dim = 2;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::vector<int> resolutions;  // nodes per axis, each n with n-1 a power of two
  PhiFunction phi;
  double lambda = 1.0;
  std::string boundary;  // mini-grammar expression for the Dirichlet data
  double kappa = 0.0;    // almost-minimality certificate parameters
  double beta = 1.0;
  SolveOptions solve;
  std::uint64_t seed = 0x5EEDULL;
  EstimateSuiteConfig est;
  std::string out_dir;  // defaults to runs/<name>
};

// Validation failures throw std::runtime_error naming the offending field;
// expression errors carry the source position.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// FNV-1a over the canonical (whitespace-insensitive, key-sorted) dump.
std::uint64_t config_hash(const std::string& json_text);
std::string canonical_config(const std::string& json_text);

PhiFunction phi_from_json_text(const std::string& json_text);
std::string phi_to_json_text(const PhiFunction& phi);

const std::vector<std::string>& known_estimates();

}  // namespace acfb
