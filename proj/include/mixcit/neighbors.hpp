#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixcit/data_model.hpp"

namespace mixcit {

// One sample restricted to a column subset, split into its numeric part
// (continuous + discrete-numeric components) and its categorical codes.
struct PointView {
  std::span<const double> numeric;
  std::span<const int> categorical;
};

// Packed row-major projection of a Dataset onto a column subset. Numeric
// components keep the column order of `cols`; categorical codes likewise.
class ProjectedView {
 public:
  ProjectedView() = default;
  ProjectedView(const Dataset& ds, std::span<const std::size_t> cols);

  std::size_t n_rows() const { return n_; }
  std::size_t numeric_dim() const { return numeric_dim_; }
  std::size_t categorical_dim() const { return categorical_dim_; }

  PointView point(std::size_t i) const {
    return {std::span<const double>(numeric_.data() + i * numeric_dim_, numeric_dim_),
            std::span<const int>(categorical_.data() + i * categorical_dim_, categorical_dim_)};
  }

  const double* numeric_row(std::size_t i) const {
    return numeric_.data() + i * numeric_dim_;
  }
  const int* categorical_row(std::size_t i) const {
    return categorical_.data() + i * categorical_dim_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t numeric_dim_ = 0;
  std::size_t categorical_dim_ = 0;
  std::vector<double> numeric_;
  std::vector<int> categorical_;
};

enum class Metric { Ms, ZeroInf };
enum class Boundary { Strict, Inclusive };

// max-norm over the product space with categorical components under the
// discrete metric (the one-hot encoding equivalent)
double ms_distance(const PointView& a, const PointView& b);

// max-norm on the numeric part when all categorical codes agree, +inf
// otherwise; plain max-norm when there is no categorical part
double zero_inf_distance(const PointView& a, const PointView& b);

double point_distance(const ProjectedView& pts, std::size_t i, std::size_t j,
                      Metric metric);

// k-th smallest distance from row i to the other rows (multiset order
// statistic; ties kept). May be 0, or +inf under the 0-inf metric.
double kth_radius(const ProjectedView& pts, std::size_t i, int k, Metric metric);

// |{j != i : d(w_j, w_i) < rho}| (Strict) or <= rho (Inclusive).
// rho == +inf returns n-1 under either boundary.
std::size_t count_within(const ProjectedView& pts, std::size_t i, double rho,
                         Metric metric, Boundary boundary);

// Rows share a cluster iff their categorical codes agree on every
// component; a projection without categorical components is one cluster.
struct ClusterIndex {
  std::vector<int> cluster_of;                    // row -> cluster id
  std::vector<std::vector<std::size_t>> members;  // cluster id -> rows
  std::size_t n_cl_min = 0;                       // smallest cluster size
};

ClusterIndex build_cluster_index(const ProjectedView& pts);

enum class KHeuristicKind { Local, Global, ClusterSize };

std::string_view k_heuristic_name(KHeuristicKind k);
KHeuristicKind k_heuristic_from_name(std::string_view name);

struct KHeuristic {
  KHeuristicKind kind = KHeuristicKind::Local;
  double k_c = 0.1;  // in (0, 1)
};

struct EffectiveK {
  std::vector<int> k;                  // per-row neighbor count, >= 1
  std::vector<std::uint8_t> zero_row;  // singleton cluster: no neighbor exists
  bool clamped = false;                // Local heuristic saw n_cl_min <= 1
};

// Local:       constant k = max(floor(k_c * (n_cl_min - 1)), 1)
// Global:      k = max(floor(k_c * n), 1) where the row's cluster has more
//              than k members, else max(floor(k_c * cluster_size), 1)
// ClusterSize: k as Global where the cluster is large enough, else
//              cluster_size - 1 (floor 1)
EffectiveK effective_k(const ClusterIndex& ci, const KHeuristic& h, std::size_t n);

}  // namespace mixcit
