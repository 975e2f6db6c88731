#include "mixcit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixcit/core_math.hpp"
#include "mixcit/errors.hpp"

namespace mixcit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distances from row i to the rows listed in `rows`, written to
// out[0..rows.size()). The slot holding row i itself is set to +inf so it
// never matches a comparison. Under Ms a categorical mismatch clamps the
// distance to at least 1; under ZeroInf it sends it to +inf.
void group_distances(const ProjectedView& v, std::size_t i, Metric metric,
                     std::span<const std::size_t> rows, double* out) {
  const std::size_t nd = v.numeric_dim();
  const std::size_t cd = v.categorical_dim();
  const double* vi = v.numeric_row(i);
  const int* ci = v.categorical_row(i);

  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const std::size_t j = rows[idx];
    if (j == i) {
      out[idx] = kInf;
      continue;
    }
    const double* vj = v.numeric_row(j);
    double d = 0.0;
    for (std::size_t c = 0; c < nd; ++c)
      d = std::max(d, std::fabs(vi[c] - vj[c]));
    if (cd) {
      const int* cj = v.categorical_row(j);
      for (std::size_t c = 0; c < cd; ++c)
        if (ci[c] != cj[c]) {
          d = metric == Metric::Ms ? std::max(d, 1.0) : kInf;
          break;
        }
    }
    out[idx] = d;
  }
}

// Lazy psi/log lookups over the integer counts an estimate touches.
class GTable {
 public:
  explicit GTable(std::size_t n)
      : psi_(n + 1, kUnset), log_(n + 1, kUnset) {}

  double psi(std::size_t v) {
    double& slot = psi_[v];
    if (slot == kUnset) slot = digamma(static_cast<double>(v));
    return slot;
  }
  double log(std::size_t v) {
    double& slot = log_[v];
    if (slot == kUnset) slot = std::log(static_cast<double>(v));
    return slot;
  }

 private:
  static constexpr double kUnset = -kInf;
  std::vector<double> psi_;
  std::vector<double> log_;
};

struct RadialResult {
  double value = 0.0;
  std::vector<double> xi;
  std::size_t zero_rows = 0;
};

// Shared per-row engine behind ms_cmi and msinf_cmi. The two estimators
// differ only in the metric and the per-row k, so a dataset without
// categorical components makes them bit-identical through this path.
//
// Under the 0-inf metric every subspace contains Z, so any row outside the
// qualitative Z class of row i sits at +inf in all four subspaces; the
// scan is restricted to that class. The Ms metric keeps cross-class
// distances finite and scans everything.
RadialResult radial_cmi(const ProjectedView& x, const ProjectedView& y,
                        const ProjectedView& z, Metric metric,
                        const std::vector<int>& k_rows,
                        const std::vector<std::uint8_t>& forced_zero) {
  const std::size_t n = x.n_rows();
  RadialResult res;
  res.xi.assign(n, 0.0);
  GTable g(n);

  ClusterIndex z_classes;
  const bool bucketed = metric == Metric::ZeroInf && z.categorical_dim() > 0;
  std::vector<std::size_t> all_rows;
  if (bucketed) {
    z_classes = build_cluster_index(z);
  } else {
    all_rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;
  }

  std::vector<double> dx(n), dy(n), dz(n), joint(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (forced_zero[i]) {
      ++res.zero_rows;
      continue;
    }
    const int k = k_rows[i];
    const std::span<const std::size_t> rows =
        bucketed ? std::span<const std::size_t>(
                       z_classes.members[z_classes.cluster_of[i]])
                 : std::span<const std::size_t>(all_rows);
    const std::size_t m = rows.size();
    if (m <= static_cast<std::size_t>(k)) {
      // not enough candidates with finite distance: rho would be +inf
      ++res.zero_rows;
      continue;
    }

    group_distances(x, i, metric, rows, dx.data());
    group_distances(y, i, metric, rows, dy.data());
    group_distances(z, i, metric, rows, dz.data());
    for (std::size_t j = 0; j < m; ++j)
      joint[j] = std::max(dx[j], std::max(dy[j], dz[j]));

    // the self slot holds +inf and sorts past every real distance
    std::copy(joint.begin(), joint.begin() + m, scratch.begin());
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1),
                     scratch.begin() + m);
    const double rho = scratch[k - 1];
    if (std::isinf(rho)) {
      ++res.zero_rows;
      continue;
    }

    std::size_t k_xyz = 0, k_xz = 0, k_yz = 0, k_z = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (joint[j] <= rho) ++k_xyz;
      if (std::max(dx[j], dz[j]) <= rho) ++k_xz;
      if (std::max(dy[j], dz[j]) <= rho) ++k_yz;
      if (dz[j] <= rho) ++k_z;
    }

    if (k_xyz == n - 1 && k_xz == n - 1 && k_yz == n - 1 && k_z == n - 1) {
      // radius swallowed the whole sample; the contribution cancels to 0
      ++res.zero_rows;
    }
    if (k_xyz == static_cast<std::size_t>(k))
      res.xi[i] = g.psi(k_xyz) + g.psi(k_z) - g.psi(k_xz) - g.psi(k_yz);
    else
      res.xi[i] = g.log(k_xyz) + g.log(k_z) - g.log(k_xz) - g.log(k_yz);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += res.xi[i];
  res.value = sum / static_cast<double>(n);
  return res;
}

void require_numeric_columns(const Dataset& ds,
                             const std::vector<std::size_t>& cols,
                             const char* op) {
  for (std::size_t c : cols)
    if (!is_numeric(ds.column(c).kind))
      throw ConfigError(std::string(op) + ": column '" + ds.column(c).name +
                        "' must be numeric");
}

// Kozachenko-Leonenko entropy over a row subset of a numeric projection.
// `rows` indexes into `quant`; radii are computed within the subset.
double kl_entropy_rows(const ProjectedView& quant,
                       const std::vector<std::size_t>& rows, int k) {
  const std::size_t ns = rows.size();
  const std::size_t m = quant.numeric_dim();
  if (ns < 2) throw DataError("kl entropy: need at least 2 rows");
  if (k < 1 || static_cast<std::size_t>(k) > ns - 1)
    throw DataError("kl entropy: k must be in [1, n-1]");

  double log_radius_sum = 0.0;
  std::vector<double> dist(ns);
  for (std::size_t a = 0; a < ns; ++a) {
    const double* va = quant.numeric_row(rows[a]);
    for (std::size_t b = 0; b < ns; ++b) {
      const double* vb = quant.numeric_row(rows[b]);
      double d = 0.0;
      for (std::size_t c = 0; c < m; ++c)
        d = std::max(d, std::fabs(va[c] - vb[c]));
      dist[b] = d;
    }
    dist[a] = kInf;
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    const double rho = dist[k - 1];
    if (rho == 0.0)
      throw DataError("kl entropy: row " + std::to_string(rows[a]) +
                      " has zero distance to its k-th neighbor "
                      "(duplicate rows)");
    log_radius_sum += std::log(rho);
  }

  return digamma(static_cast<double>(ns)) - digamma(static_cast<double>(k)) +
         log_unit_ball_volume(static_cast<int>(m)) +
         (static_cast<double>(m) / static_cast<double>(ns)) * log_radius_sum;
}

std::vector<std::size_t> all_columns(const Dataset& ds) {
  std::vector<std::size_t> cols(ds.n_cols());
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

std::vector<std::size_t> concat(const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b,
                                const std::vector<std::size_t>& c = {}) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace

std::string_view estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::KL: return "kl";
    case EstimatorKind::KSG: return "ksg";
    case EstimatorKind::FP: return "fp";
    case EstimatorKind::GKOV: return "gkov";
    case EstimatorKind::MS: return "ms";
    case EstimatorKind::ZMADG: return "zmadg";
    case EstimatorKind::MSInf: return "msinf";
  }
  return "?";
}

EstimatorKind estimator_from_name(std::string_view name) {
  if (name == "kl") return EstimatorKind::KL;
  if (name == "ksg") return EstimatorKind::KSG;
  if (name == "fp") return EstimatorKind::FP;
  if (name == "gkov") return EstimatorKind::GKOV;
  if (name == "ms") return EstimatorKind::MS;
  if (name == "zmadg") return EstimatorKind::ZMADG;
  if (name == "msinf") return EstimatorKind::MSInf;
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

int resolve_k(const EstimatorConfig& cfg, std::size_t n) {
  if (n < 2) throw DataError("estimator: need at least 2 rows");
  if (cfg.explicit_k) {
    const int k = *cfg.explicit_k;
    if (k < 1 || static_cast<std::size_t>(k) > n - 1)
      throw ConfigError("explicit k must lie in [1, n-1]");
    return k;
  }
  if (!(cfg.k_c > 0.0 && cfg.k_c < 1.0))
    throw ConfigError("k_c must lie in (0, 1)");
  const int k = static_cast<int>(std::floor(cfg.k_c * static_cast<double>(n) + 1e-9));
  return std::clamp(k, 1, static_cast<int>(n - 1));
}

double kl_entropy(const Dataset& ds, int k) {
  const auto cols = all_columns(ds);
  require_numeric_columns(ds, cols, "kl entropy");
  ProjectedView view(ds, cols);
  std::vector<std::size_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  return kl_entropy_rows(view, rows, k);
}

namespace {

// KSG / FP body: strict counts at the joint-space radius. An empty Z makes
// every z-distance 0, so k_z = n-1 and the psi(n) term of KSG appears.
double ksg_fp_core(const Dataset& ds, const VariablePartition& part, int k,
                   const char* op) {
  part.validate(ds);
  require_numeric_columns(ds, concat(part.x_cols, part.y_cols, part.z_cols), op);
  const std::size_t n = ds.n_rows();
  if (n < 2) throw DataError(std::string(op) + ": need at least 2 rows");
  if (k < 1 || static_cast<std::size_t>(k) > n - 1)
    throw DataError(std::string(op) + ": k must be in [1, n-1]");

  ProjectedView x(ds, part.x_cols), y(ds, part.y_cols), z(ds, part.z_cols);
  GTable g(n);

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<double> dx(n), dy(n), dz(n), joint(n), scratch(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    group_distances(x, i, Metric::Ms, all_rows, dx.data());
    group_distances(y, i, Metric::Ms, all_rows, dy.data());
    group_distances(z, i, Metric::Ms, all_rows, dz.data());
    for (std::size_t j = 0; j < n; ++j)
      joint[j] = std::max(dx[j], std::max(dy[j], dz[j]));

    scratch = joint;
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    const double rho = scratch[k - 1];
    if (rho == 0.0)
      throw DataError(std::string(op) + ": row " + std::to_string(i) +
                      " has zero distance to its k-th neighbor "
                      "(duplicate rows)");

    std::size_t k_xz = 0, k_yz = 0, k_z = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::max(dx[j], dz[j]) < rho) ++k_xz;
      if (std::max(dy[j], dz[j]) < rho) ++k_yz;
      if (dz[j] < rho) ++k_z;
    }
    sum += g.psi(k) + g.psi(k_z + 1) - g.psi(k_xz + 1) - g.psi(k_yz + 1);
  }
  return sum / static_cast<double>(n);
}

}  // namespace

double ksg_mi(const Dataset& ds, const VariablePartition& part, int k) {
  if (!part.z_cols.empty())
    throw ConfigError("ksg: Z must be empty (use fp for conditional MI)");
  return ksg_fp_core(ds, part, k, "ksg");
}

double fp_cmi(const Dataset& ds, const VariablePartition& part, int k) {
  return ksg_fp_core(ds, part, k, "fp");
}

double gkov_mi(const Dataset& ds, const VariablePartition& part, int k) {
  if (!part.z_cols.empty()) throw ConfigError("gkov: Z must be empty");
  part.validate(ds);
  const std::size_t n = ds.n_rows();
  if (n < 2) throw DataError("gkov: need at least 2 rows");
  if (k < 1 || static_cast<std::size_t>(k) > n - 1)
    throw DataError("gkov: k must be in [1, n-1]");

  ProjectedView x(ds, part.x_cols), y(ds, part.y_cols);
  GTable g(n);

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<double> dx(n), dy(n), joint(n), scratch(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    group_distances(x, i, Metric::Ms, all_rows, dx.data());
    group_distances(y, i, Metric::Ms, all_rows, dy.data());
    for (std::size_t j = 0; j < n; ++j) joint[j] = std::max(dx[j], dy[j]);

    scratch = joint;
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    const double rho = scratch[k - 1];

    std::size_t k_xy = 0, k_x = 0, k_y = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (joint[j] <= rho) ++k_xy;
      if (dx[j] <= rho) ++k_x;
      if (dy[j] <= rho) ++k_y;
    }
    const std::size_t k_prime = rho > 0.0 ? static_cast<std::size_t>(k) : k_xy;
    sum += g.psi(k_prime) + g.log(n) - g.log(k_x + 1) - g.log(k_y + 1);
  }
  return sum / static_cast<double>(n);
}

CmiEstimate ms_cmi(const Dataset& ds, const VariablePartition& part,
                   const EstimatorConfig& cfg) {
  part.validate(ds);
  const std::size_t n = ds.n_rows();
  const int k = resolve_k(cfg, n);

  ProjectedView x(ds, part.x_cols), y(ds, part.y_cols), z(ds, part.z_cols);
  RadialResult r = radial_cmi(x, y, z, Metric::Ms, std::vector<int>(n, k),
                              std::vector<std::uint8_t>(n, 0));

  CmiEstimate est;
  est.value = cfg.clamp_nonnegative ? std::max(r.value, 0.0) : r.value;
  est.xi = std::move(r.xi);
  est.k_used.assign(n, k);
  est.zero_rows = r.zero_rows;
  return est;
}

CmiEstimate msinf_cmi(const Dataset& ds, const VariablePartition& part,
                      const EstimatorConfig& cfg) {
  part.validate(ds);
  const std::size_t n = ds.n_rows();
  if (n < 2) throw DataError("msinf: need at least 2 rows");

  ProjectedView x(ds, part.x_cols), y(ds, part.y_cols), z(ds, part.z_cols);
  ProjectedView xyz(ds, concat(part.x_cols, part.y_cols, part.z_cols));
  const ClusterIndex ci = build_cluster_index(xyz);
  if (ci.n_cl_min <= 1 && ci.members.size() == n)
    throw DataError("msinf: every cluster is a singleton; "
                    "the estimator is undefined on this data");

  std::vector<int> k_rows;
  std::vector<std::uint8_t> zero_mask;
  if (cfg.explicit_k) {
    const int k = *cfg.explicit_k;
    if (k < 1 || static_cast<std::size_t>(k) > n - 1)
      throw ConfigError("explicit k must lie in [1, n-1]");
    k_rows.assign(n, k);
    zero_mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (ci.members[ci.cluster_of[i]].size() == 1) zero_mask[i] = 1;
  } else {
    EffectiveK ek = effective_k(ci, KHeuristic{cfg.heuristic, cfg.k_c}, n);
    k_rows = std::move(ek.k);
    zero_mask = std::move(ek.zero_row);
  }

  RadialResult r = radial_cmi(x, y, z, Metric::ZeroInf, k_rows, zero_mask);

  CmiEstimate est;
  est.value = cfg.clamp_nonnegative ? std::max(r.value, 0.0) : r.value;
  est.xi = std::move(r.xi);
  est.k_used = std::move(k_rows);
  est.zero_rows = r.zero_rows;
  return est;
}

namespace {

// plug-in entropy of the empirical code-tuple frequencies
double plugin_entropy(const ProjectedView& qual) {
  if (qual.categorical_dim() == 0) return 0.0;
  const ClusterIndex ci = build_cluster_index(qual);
  const double n = static_cast<double>(qual.n_rows());
  double h = 0.0;
  for (const auto& m : ci.members) {
    const double p = static_cast<double>(m.size()) / n;
    h -= p * std::log(p);
  }
  return h;
}

// Cluster-weighted KL entropy of the quantitative columns conditioned on
// the qualitative code tuple. Clusters with fewer than 2 rows cannot carry
// a KL estimate; they are dropped and the remaining weights renormalized.
double conditional_differential_entropy(const Dataset& ds,
                                        const std::vector<std::size_t>& cols,
                                        double k_c, std::size_t* dropped) {
  std::vector<std::size_t> quant_cols, qual_cols;
  for (std::size_t c : cols)
    (is_numeric(ds.column(c).kind) ? quant_cols : qual_cols).push_back(c);
  if (quant_cols.empty()) return 0.0;

  ProjectedView quant(ds, quant_cols);
  ProjectedView qual(ds, qual_cols);
  const ClusterIndex ci = build_cluster_index(qual);

  double weight_total = 0.0;
  double acc = 0.0;
  for (const auto& members : ci.members) {
    if (members.size() < 2) {
      ++*dropped;
      continue;
    }
    const int k = std::max(
        static_cast<int>(std::floor(k_c * static_cast<double>(members.size()) + 1e-9)),
        1);
    acc += static_cast<double>(members.size()) * kl_entropy_rows(quant, members, k);
    weight_total += static_cast<double>(members.size());
  }
  if (weight_total == 0.0)
    throw DataError("zmadg: no cluster has enough rows for a KL estimate");
  return acc / weight_total;
}

}  // namespace

CmiEstimate zmadg_cmi(const Dataset& ds, const VariablePartition& part,
                      const EstimatorConfig& cfg) {
  part.validate(ds);
  if (cfg.explicit_k)
    throw ConfigError("zmadg: k is set per cluster from k_c; "
                      "explicit k is not supported");
  if (!(cfg.k_c > 0.0 && cfg.k_c < 1.0))
    throw ConfigError("k_c must lie in (0, 1)");

  const auto xz = concat(part.x_cols, part.z_cols);
  const auto yz = concat(part.y_cols, part.z_cols);
  const auto xyz = concat(part.x_cols, part.y_cols, part.z_cols);
  const auto& z = part.z_cols;

  CmiEstimate est;
  double acc = 0.0;
  acc += conditional_differential_entropy(ds, xz, cfg.k_c, &est.dropped_clusters);
  acc += conditional_differential_entropy(ds, yz, cfg.k_c, &est.dropped_clusters);
  acc -= conditional_differential_entropy(ds, xyz, cfg.k_c, &est.dropped_clusters);
  if (!z.empty())
    acc -= conditional_differential_entropy(ds, z, cfg.k_c, &est.dropped_clusters);

  auto qual_entropy = [&](const std::vector<std::size_t>& cols) {
    std::vector<std::size_t> qual_cols;
    for (std::size_t c : cols)
      if (!is_numeric(ds.column(c).kind)) qual_cols.push_back(c);
    if (qual_cols.empty()) return 0.0;
    return plugin_entropy(ProjectedView(ds, qual_cols));
  };
  acc += qual_entropy(xz) + qual_entropy(yz) - qual_entropy(xyz) - qual_entropy(z);

  est.value = cfg.clamp_nonnegative ? std::max(acc, 0.0) : acc;
  return est;
}

CmiEstimate estimate_cmi(const Dataset& ds, const VariablePartition& part,
                         const EstimatorConfig& cfg) {
  switch (cfg.kind) {
    case EstimatorKind::MS: return ms_cmi(ds, part, cfg);
    case EstimatorKind::MSInf: return msinf_cmi(ds, part, cfg);
    case EstimatorKind::ZMADG: return zmadg_cmi(ds, part, cfg);
    case EstimatorKind::KSG: {
      CmiEstimate est;
      est.value = ksg_mi(ds, part, resolve_k(cfg, ds.n_rows()));
      return est;
    }
    case EstimatorKind::FP: {
      CmiEstimate est;
      est.value = fp_cmi(ds, part, resolve_k(cfg, ds.n_rows()));
      return est;
    }
    case EstimatorKind::GKOV: {
      CmiEstimate est;
      est.value = gkov_mi(ds, part, resolve_k(cfg, ds.n_rows()));
      return est;
    }
    case EstimatorKind::KL: {
      part.validate(ds);
      std::vector<Column> cols;
      for (std::size_t c : concat(part.x_cols, part.y_cols, part.z_cols))
        cols.push_back(ds.column(c));
      Dataset joint(std::move(cols));
      CmiEstimate est;
      est.value = kl_entropy(joint, resolve_k(cfg, ds.n_rows()));
      return est;
    }
  }
  throw ConfigError("unknown estimator kind");
}

}  // namespace mixcit
