#include "mixcit/cit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixcit/errors.hpp"
#include "mixcit/neighbors.hpp"
#include "mixcit/parallel.hpp"

namespace mixcit {

std::vector<std::vector<std::size_t>> permutation_pools(
    const Dataset& ds, const VariablePartition& part, int k_perm) {
  part.validate(ds);
  if (k_perm < 1) throw ConfigError("k_perm must be >= 1");
  const std::size_t n = ds.n_rows();
  std::vector<std::vector<std::size_t>> pools(n);

  if (part.z_cols.empty()) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (auto& pool : pools) pool = all;
    return pools;
  }

  ProjectedView z(ds, part.z_cols);
  const ClusterIndex ci = build_cluster_index(z);
  const std::size_t m = z.numeric_dim();

  for (const auto& members : ci.members) {
    if (m == 0 || members.size() <= static_cast<std::size_t>(k_perm)) {
      for (std::size_t row : members) pools[row] = members;
      continue;
    }
    std::vector<double> dist(members.size());
    std::vector<double> scratch(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      const double* va = z.numeric_row(members[a]);
      for (std::size_t b = 0; b < members.size(); ++b) {
        const double* vb = z.numeric_row(members[b]);
        double d = 0.0;
        for (std::size_t c = 0; c < m; ++c)
          d = std::max(d, std::fabs(va[c] - vb[c]));
        dist[b] = d;
      }
      // the row itself sits at distance 0 and counts toward the k_perm
      // nearest; all rows tied with the k_perm-th distance join the pool
      scratch = dist;
      std::nth_element(scratch.begin(), scratch.begin() + (k_perm - 1),
                       scratch.end());
      const double radius = scratch[k_perm - 1];
      for (std::size_t b = 0; b < members.size(); ++b)
        if (dist[b] <= radius) pools[members[a]].push_back(members[b]);
    }
  }
  return pools;
}

LocalPermutation draw_local_permutation(const Dataset& ds,
                                        const VariablePartition& part,
                                        int k_perm, Rng& rng) {
  const std::size_t n = ds.n_rows();
  LocalPermutation out;
  out.sigma.assign(n, 0);

  if (part.z_cols.empty()) {
    part.validate(ds);
    out.sigma = rng.permutation(n);
    return out;
  }

  const auto pools = permutation_pools(ds, part, k_perm);
  const std::vector<std::size_t> order = rng.permutation(n);
  std::vector<std::uint8_t> used(n, 0);
  std::vector<std::size_t> open;

  for (std::size_t i : order) {
    const auto& pool = pools[i];
    open.clear();
    for (std::size_t j : pool)
      if (!used[j]) open.push_back(j);
    std::size_t pick;
    if (!open.empty()) {
      pick = open[rng.below(open.size())];
    } else {
      pick = pool[rng.below(pool.size())];
      ++out.fallback_count;
    }
    out.sigma[i] = pick;
    used[pick] = 1;
  }
  return out;
}

std::vector<std::size_t> local_permutation(const Dataset& ds,
                                           const VariablePartition& part,
                                           int k_perm, Rng& rng) {
  return draw_local_permutation(ds, part, k_perm, rng).sigma;
}

Dataset permute_x_columns(const Dataset& ds, const VariablePartition& part,
                          std::span<const std::size_t> sigma) {
  if (sigma.size() != ds.n_rows())
    throw DataError("permute_x_columns: sigma length mismatch");
  std::vector<Column> cols = ds.columns();
  for (std::size_t c : part.x_cols) {
    const std::vector<double>& src = ds.column(c).values;
    std::vector<double>& dst = cols[c].values;
    for (std::size_t i = 0; i < sigma.size(); ++i) dst[i] = src[sigma[i]];
  }
  return Dataset(std::move(cols));
}

double permutation_pvalue(double t_obs, std::span<const double> t_perm) {
  if (t_perm.empty())
    throw DataError("permutation_pvalue: no permuted statistics");
  std::size_t count = 0;
  for (double t : t_perm)
    if (t >= t_obs) ++count;
  return static_cast<double>(count) / static_cast<double>(t_perm.size());
}

CitResult run_cit(const Dataset& ds, const VariablePartition& part,
                  const CitConfig& cfg) {
  part.validate(ds);
  if (cfg.permutations < 1) throw ConfigError("cit: B must be >= 1");
  if (cfg.k_perm < 1) throw ConfigError("cit: k_perm must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ConfigError("cit: alpha must lie in (0, 1)");

  CitResult res;
  try {
    res.t_obs = estimate_cmi(ds, part, cfg.estimator).value;
  } catch (const DataError& e) {
    throw DataError(std::string("cit (observed data): ") + e.what());
  }

  const std::size_t b_count = static_cast<std::size_t>(cfg.permutations);
  res.t_perm.assign(b_count, 0.0);
  parallel_for(
      b_count,
      [&](std::size_t b) {
        Rng rng(derive_seed(cfg.seed, b + 1));
        const auto sigma = local_permutation(ds, part, cfg.k_perm, rng);
        const Dataset permuted = permute_x_columns(ds, part, sigma);
        try {
          res.t_perm[b] = estimate_cmi(permuted, part, cfg.estimator).value;
        } catch (const DataError& e) {
          throw DataError("cit (surrogate " + std::to_string(b) + "): " +
                          e.what());
        }
      },
      cfg.threads);

  res.p_value = permutation_pvalue(res.t_obs, res.t_perm);
  res.reject = res.p_value < cfg.alpha;
  return res;
}

}  // namespace mixcit
