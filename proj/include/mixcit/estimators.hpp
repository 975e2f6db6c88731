#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mixcit/data_model.hpp"
#include "mixcit/neighbors.hpp"

namespace mixcit {

enum class EstimatorKind { KL, KSG, FP, GKOV, MS, ZMADG, MSInf };

std::string_view estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(std::string_view name);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::MSInf;
  double k_c = 0.1;  // in (0, 1); turned into k via the estimator's rule
  KHeuristicKind heuristic = KHeuristicKind::Local;  // MSInf only
  std::optional<int> explicit_k;  // overrides k_c (rejected by ZMADG)
  bool clamp_nonnegative = false;
};

struct CmiEstimate {
  double value = 0.0;      // nats; equals mean(xi) for MS and MSInf
  std::vector<double> xi;  // per-row contributions (empty for ZMADG)
  std::vector<int> k_used; // per-row effective k (empty for ZMADG)
  std::size_t zero_rows = 0;  // rows forced to xi == 0 by degenerate geometry
  std::size_t dropped_clusters = 0;  // ZMADG: clusters too small to estimate
};

// explicit_k, or max(floor(k_c * n), 1) clamped to [1, n-1]
int resolve_k(const EstimatorConfig& cfg, std::size_t n);

// Joint differential entropy of an all-numeric dataset via k-NN radii
// under the max-norm. Duplicate rows make the radius collapse to zero and
// raise a degenerate-geometry error.
double kl_entropy(const Dataset& ds, int k);

// Mutual information of numeric X, Y (Z must be empty); strict boundary
// counts at the joint-space k-th neighbor radius.
double ksg_mi(const Dataset& ds, const VariablePartition& part, int k);

// Conditional mutual information of numeric X, Y given numeric Z; reduces
// exactly to ksg_mi when Z is empty.
double fp_cmi(const Dataset& ds, const VariablePartition& part, int k);

// Mixed-type mutual information (Z must be empty); categorical components
// enter through the discrete metric, inclusive boundary counts.
double gkov_mi(const Dataset& ds, const VariablePartition& part, int k);

CmiEstimate ms_cmi(const Dataset& ds, const VariablePartition& part,
                   const EstimatorConfig& cfg);

CmiEstimate zmadg_cmi(const Dataset& ds, const VariablePartition& part,
                      const EstimatorConfig& cfg);

CmiEstimate msinf_cmi(const Dataset& ds, const VariablePartition& part,
                      const EstimatorConfig& cfg);

// Dispatch on cfg.kind. KL reports the joint entropy of all partition
// columns; KL/KSG/FP/GKOV results carry the value only.
CmiEstimate estimate_cmi(const Dataset& ds, const VariablePartition& part,
                         const EstimatorConfig& cfg);

}  // namespace mixcit
