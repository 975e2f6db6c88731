#include "mixcit/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mixcit/errors.hpp"

namespace mixcit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shapes(const PointView& a, const PointView& b) {
  if (a.numeric.size() != b.numeric.size() ||
      a.categorical.size() != b.categorical.size())
    throw DataError("point distance: shape mismatch");
}

}  // namespace

ProjectedView::ProjectedView(const Dataset& ds, std::span<const std::size_t> cols) {
  n_ = ds.n_rows();
  std::vector<std::size_t> numeric_cols;
  std::vector<std::size_t> categorical_cols;
  for (std::size_t c : cols) {
    if (c >= ds.n_cols())
      throw ConfigError("projection: column index " + std::to_string(c) +
                        " out of range");
    (is_numeric(ds.column(c).kind) ? numeric_cols : categorical_cols).push_back(c);
  }
  numeric_dim_ = numeric_cols.size();
  categorical_dim_ = categorical_cols.size();
  numeric_.resize(n_ * numeric_dim_);
  categorical_.resize(n_ * categorical_dim_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t c = 0; c < numeric_dim_; ++c)
      numeric_[i * numeric_dim_ + c] = ds.column(numeric_cols[c]).values[i];
    for (std::size_t c = 0; c < categorical_dim_; ++c)
      categorical_[i * categorical_dim_ + c] =
          static_cast<int>(ds.column(categorical_cols[c]).values[i]);
  }
}

double ms_distance(const PointView& a, const PointView& b) {
  check_shapes(a, b);
  double d = 0.0;
  for (std::size_t c = 0; c < a.numeric.size(); ++c)
    d = std::max(d, std::fabs(a.numeric[c] - b.numeric[c]));
  for (std::size_t c = 0; c < a.categorical.size(); ++c)
    if (a.categorical[c] != b.categorical[c]) {
      d = std::max(d, 1.0);
      break;
    }
  return d;
}

double zero_inf_distance(const PointView& a, const PointView& b) {
  check_shapes(a, b);
  for (std::size_t c = 0; c < a.categorical.size(); ++c)
    if (a.categorical[c] != b.categorical[c]) return kInf;
  double d = 0.0;
  for (std::size_t c = 0; c < a.numeric.size(); ++c)
    d = std::max(d, std::fabs(a.numeric[c] - b.numeric[c]));
  return d;
}

double point_distance(const ProjectedView& pts, std::size_t i, std::size_t j,
                      Metric metric) {
  return metric == Metric::Ms ? ms_distance(pts.point(i), pts.point(j))
                              : zero_inf_distance(pts.point(i), pts.point(j));
}

double kth_radius(const ProjectedView& pts, std::size_t i, int k, Metric metric) {
  const std::size_t n = pts.n_rows();
  if (i >= n) throw DataError("kth_radius: row index out of range");
  if (k < 1 || static_cast<std::size_t>(k) > n - 1)
    throw DataError("kth_radius: k must be in [1, n-1]");

  std::vector<double> dist;
  dist.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    dist.push_back(point_distance(pts, i, j, metric));
  }
  std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
  return dist[k - 1];
}

std::size_t count_within(const ProjectedView& pts, std::size_t i, double rho,
                         Metric metric, Boundary boundary) {
  const std::size_t n = pts.n_rows();
  if (i >= n) throw DataError("count_within: row index out of range");
  if (std::isinf(rho)) return n - 1;

  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d = point_distance(pts, i, j, metric);
    if (boundary == Boundary::Strict ? d < rho : d <= rho) ++count;
  }
  return count;
}

ClusterIndex build_cluster_index(const ProjectedView& pts) {
  const std::size_t n = pts.n_rows();
  ClusterIndex ci;
  ci.cluster_of.resize(n);

  if (pts.categorical_dim() == 0) {
    ci.members.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) {
      ci.cluster_of[i] = 0;
      ci.members[0][i] = i;
    }
    ci.n_cl_min = n;
    return ci;
  }

  std::map<std::vector<int>, int> ids;
  std::vector<int> key(pts.categorical_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const int* row = pts.categorical_row(i);
    key.assign(row, row + pts.categorical_dim());
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(ci.members.size()));
    if (inserted) ci.members.emplace_back();
    ci.cluster_of[i] = it->second;
    ci.members[it->second].push_back(i);
  }

  ci.n_cl_min = n;
  for (const auto& m : ci.members) ci.n_cl_min = std::min(ci.n_cl_min, m.size());
  return ci;
}

std::string_view k_heuristic_name(KHeuristicKind k) {
  switch (k) {
    case KHeuristicKind::Local: return "local";
    case KHeuristicKind::Global: return "global";
    case KHeuristicKind::ClusterSize: return "cluster";
  }
  return "?";
}

KHeuristicKind k_heuristic_from_name(std::string_view name) {
  if (name == "local") return KHeuristicKind::Local;
  if (name == "global") return KHeuristicKind::Global;
  if (name == "cluster") return KHeuristicKind::ClusterSize;
  throw ConfigError("unknown k heuristic '" + std::string(name) +
                    "' (expected local, global or cluster)");
}

namespace {

// floor with a small guard so grid values like 0.3 * 10 land on the
// intended integer
int floor_k(double v) { return static_cast<int>(std::floor(v + 1e-9)); }

}  // namespace

EffectiveK effective_k(const ClusterIndex& ci, const KHeuristic& h, std::size_t n) {
  if (!(h.k_c > 0.0 && h.k_c < 1.0))
    throw ConfigError("k heuristic: k_c must lie in (0, 1)");
  if (ci.cluster_of.size() != n)
    throw ConfigError("k heuristic: cluster index does not cover the sample");

  EffectiveK out;
  out.k.assign(n, 1);
  out.zero_row.assign(n, 0);

  auto cluster_size = [&](std::size_t row) {
    return ci.members[ci.cluster_of[row]].size();
  };

  switch (h.kind) {
    case KHeuristicKind::Local: {
      int k = std::max(floor_k(h.k_c * static_cast<double>(ci.n_cl_min - 1)), 1);
      if (ci.n_cl_min <= 1) {
        out.clamped = true;
        k = 1;
      }
      for (std::size_t i = 0; i < n; ++i) out.k[i] = k;
      break;
    }
    case KHeuristicKind::Global: {
      const int k_glob = std::max(floor_k(h.k_c * static_cast<double>(n)), 1);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = cluster_size(i);
        out.k[i] = s > static_cast<std::size_t>(k_glob)
                       ? k_glob
                       : std::max(floor_k(h.k_c * static_cast<double>(s)), 1);
      }
      break;
    }
    case KHeuristicKind::ClusterSize: {
      const int k_glob = std::max(floor_k(h.k_c * static_cast<double>(n)), 1);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = cluster_size(i);
        out.k[i] = s > static_cast<std::size_t>(k_glob)
                       ? k_glob
                       : std::max(static_cast<int>(s) - 1, 1);
      }
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (cluster_size(i) == 1) out.zero_row[i] = 1;
  return out;
}

}  // namespace mixcit
