#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixcit/data_model.hpp"
#include "mixcit/estimators.hpp"
#include "mixcit/random.hpp"

namespace mixcit {

struct CitConfig {
  int permutations = 100;  // B
  int k_perm = 5;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  EstimatorConfig estimator;
  std::size_t threads = 1;  // surrogate statistics may run in parallel
};

struct CitResult {
  double t_obs = 0.0;
  std::vector<double> t_perm;
  double p_value = 1.0;
  bool reject = false;
};

// Candidate pools of the Z-local permutation: rows with identical
// qualitative Z and, when Z has quantitative components, within the
// k_perm-th nearest max-norm distance inside that class (boundary ties
// included; the row itself always belongs to its pool). Every pool is the
// full row set when Z is empty.
std::vector<std::vector<std::size_t>> permutation_pools(
    const Dataset& ds, const VariablePartition& part, int k_perm);

struct LocalPermutation {
  std::vector<std::size_t> sigma;
  std::size_t fallback_count = 0;  // rows that had to reuse a taken candidate
};

// Draw-without-replacement over the pools in a random visiting order; an
// exhausted pool falls back to a uniformly random already-used candidate,
// which can repeat a source row. sigma is a bijection whenever
// fallback_count == 0 (always, for fully discrete or empty Z).
LocalPermutation draw_local_permutation(const Dataset& ds,
                                        const VariablePartition& part,
                                        int k_perm, Rng& rng);

std::vector<std::size_t> local_permutation(const Dataset& ds,
                                           const VariablePartition& part,
                                           int k_perm, Rng& rng);

// x_i <- x_{sigma(i)} on the X columns only
Dataset permute_x_columns(const Dataset& ds, const VariablePartition& part,
                          std::span<const std::size_t> sigma);

// (1/B) |{ t_perm >= t_obs }|; ties count toward rejection of the null
double permutation_pvalue(double t_obs, std::span<const double> t_perm);

// Observed statistic, B surrogate statistics on independently drawn local
// permutations (per-surrogate RNG streams derived from (seed, index)), and
// the permutation p-value. Deterministic given the seed.
CitResult run_cit(const Dataset& ds, const VariablePartition& part,
                  const CitConfig& cfg);

}  // namespace mixcit
