#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixcit/data_model.hpp"
#include "mixcit/estimators.hpp"
#include "mixcit/models.hpp"

namespace mixcit {

struct SweepSpec {
  std::string name = "sweep";
  ModelSpec model;  // template; n is overridden by n_grid, w is the
                    // alternative-arm coupling for CIT sweeps
  std::vector<EstimatorConfig> estimators;  // k_c comes from the grid
  std::vector<double> k_c_grid;
  std::vector<std::size_t> n_grid;
  std::vector<Preprocessing> preprocessing;
  int repetitions = 1;
  int permutations = 100;  // CIT sweeps
  int k_perm = 5;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
};

SweepSpec sweep_spec_from_json_file(const std::string& path);

struct SweepCell {
  EstimatorKind estimator;
  KHeuristicKind heuristic;
  double k_c;
  std::size_t n;
  Preprocessing prep;
};

struct CmiSweepRow {
  std::size_t cell;
  int rep;
  std::uint64_t seed;
  bool ok;
  std::string error;
  double estimate;
  double truth;
  double runtime_s;
};

struct CmiCellSummary {
  SweepCell cell;
  int n_ok = 0;
  int n_failed = 0;
  double mean = 0.0;
  std::optional<double> variance;  // absent when fewer than 2 estimates
  double mae = 0.0;
  double mean_runtime_s = 0.0;
};

struct CmiSweepResult {
  SweepSpec spec;
  std::vector<SweepCell> cells;
  std::vector<CmiSweepRow> rows;
  std::vector<CmiCellSummary> summaries;
};

// R seeded repetitions per (estimator, k_c, n, preprocessing) cell over an
// estimation-family model with known ground truth. Estimator failures are
// recorded per repetition, not fatal.
CmiSweepResult run_cmi_sweep(const SweepSpec& spec);

struct CitSweepRow {
  std::size_t cell;
  int rep;
  bool alternative;  // false: null arm (w = 0)
  std::uint64_t seed;
  bool ok;
  std::string error;
  double t_obs;
  double p_value;
  bool reject;
  double runtime_s;
};

struct RateReport {
  SweepCell cell;
  double fpr = 0.0;
  double tpr = 0.0;  // meaningless when n_alt == 0
  int fp_count = 0;
  int tp_count = 0;
  int n_null = 0;
  int n_alt = 0;
  double fpr_ci_low = 0.0, fpr_ci_high = 0.0;  // exact binomial 95% bounds
  double tpr_ci_low = 0.0, tpr_ci_high = 0.0;
  double mean_runtime_s = 0.0;
};

struct CitSweepResult {
  SweepSpec spec;
  std::vector<SweepCell> cells;
  std::vector<CitSweepRow> rows;
  std::vector<RateReport> reports;
};

// R null (w = 0) and, when spec.model.w > 0, R alternative repetitions per
// cell; null and alternative share their data seed so only the coupling
// term differs.
CitSweepResult run_cit_sweep(const SweepSpec& spec);

// Exact (Clopper-Pearson) binomial confidence bounds found by bisecting
// the tail equations to 1e-8. successes == 0 pins low to 0 and
// successes == trials pins high to 1.
std::pair<double, double> binomial_ci(int successes, int trials, double alpha);

// Writers emit <dir>/<name>_<tag>.csv and .json and return both paths; an
// empty tag is replaced by the current UTC timestamp. File contents are a
// pure function of the result, so repeated runs produce identical bytes.
struct SweepFiles {
  std::string csv;
  std::string json;
};

SweepFiles write_cmi_sweep(const CmiSweepResult& result, const std::string& dir,
                           const std::string& tag = "");
SweepFiles write_cit_sweep(const CitSweepResult& result, const std::string& dir,
                           const std::string& tag = "");

}  // namespace mixcit
