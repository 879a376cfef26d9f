#pragma once

#include <string>
#include <vector>

#include "acfb/config.hpp"
#include "acfb/csv.hpp"
#include "acfb/minimize.hpp"

namespace acfb {

struct RunnerOptions {
  std::string out_dir;      // overrides cfg.out_dir when nonempty
  std::string config_text;  // raw JSON, hashed into the manifest
  bool strict = false;      // solver nonconvergence becomes a failure
  bool solve_only = false;  // skip the estimate suite
};

struct ResolutionRun {
  int n = 0;
  double h = 0.0;
  SolveResult solve;
  std::vector<EstimateReport> reports;
  std::string field_path, field_csv_path, solve_record_path, estimates_csv_path;
};

struct RunResult {
  std::string out_dir;
  std::string manifest_path;
  std::string summary_path;
  std::uint64_t hash = 0;
  std::vector<ResolutionRun> resolutions;
  std::vector<std::string> warnings;
  bool solver_ok = true;  // every resolution converged
  bool suite_pass = true;
  // 0 pass, 1 suite failure, 3 solver failure under strict
  int exit_code(bool strict) const;
};

// Solves at every listed resolution, runs the selected estimates, and writes
// u_<n>.bin/.csv, solve_<n>.json, estimates_<n>.csv, summary.json and
// manifest.json under the output directory. Estimates that throw are
// recorded as failed rows, not propagated. Wall times appear only in the
// manifest, so repeated runs with one seed produce byte-identical CSVs.
RunResult run_experiment(const ExperimentConfig& cfg, const RunnerOptions& opt = {});

// Merges the estimate CSVs referenced by a list of manifests. Rows from
// different runs that land on the same (name, family, h, key, r) slot with
// diverging values are flagged, not averaged.
CsvTable consolidate_manifests(const std::vector<std::string>& manifest_paths);

}  // namespace acfb
