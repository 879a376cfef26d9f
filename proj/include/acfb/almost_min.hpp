#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acfb/functional.hpp"

namespace acfb {

struct CompetitorSpec {
  bool replacement = true;
  bool truncations = true;
  bool mollify = true;
  bool random = true;
  int random_count = 5;
  double random_amplitude_rel = 0.05;  // times the local sup
  std::uint64_t seed = 0x5EEDULL;
};

struct CompetitorRow {
  std::string competitor;
  Ball ball;
  double energy_u = 0.0;
  double energy_w = 0.0;
  double ratio = 1.0;  // F(u;B) / F(w;B)
  double bound = 1.0;  // 1 + kappa r^beta
  bool pass = true;
};

struct AlmostMinCert {
  double kappa = 0.0;
  double beta = 1.0;
  std::vector<Ball> balls;
  std::vector<CompetitorRow> rows;
  double worst_ratio = 0.0;
  bool pass = true;
};

// Pits u against replacement, truncation, mollification, and random
// competitors on each ball and certifies F(u;B_r) <= (1+kappa r^beta) F(w;B_r)
// up to a fixed relative slack of 1e-9.
AlmostMinCert check_almost_min(const Functional& fn, const Field& u, double kappa, double beta,
                               const std::vector<Ball>& balls, const CompetitorSpec& spec = {});

}  // namespace acfb
