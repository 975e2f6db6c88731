#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mixcit/data_model.hpp"

namespace mixcit {

// Estimation families carry an analytic ground truth; CIT families carry
// the h0 flag instead (conditional independence holds iff w == 0).
enum class ModelFamily {
  IndepZEst,
  ChainStructEst,
  ConfGaussEst,
  ConfUnifEst,
  MixtureEst,
  ConfounderCit,
  IndepZCit,
  ClusterConfCit,
  ChainCit,
};

std::string_view model_family_name(ModelFamily f);
ModelFamily model_family_from_name(std::string_view name);
bool is_cit_family(ModelFamily f);

struct ModelSpec {
  ModelFamily family = ModelFamily::IndepZEst;
  std::size_t n = 0;
  int c = 5;        // IndepZEst: number of discrete X values
  int d = 1;        // IndepZEst / ChainStructEst: Z dimension
  int m = 9;        // ConfGaussEst: Z ~ U{0..m}
  double p = 0.3;   // MixtureEst: weight of the discrete branch
  int dim_c = 1;    // ConfounderCit: continuous Z dimensions
  int dim_d = 1;    // ConfounderCit / IndepZCit: discrete Z dimensions
  int n_classes = 3;  // CIT families: categories per discrete Z component
  double w = 0.0;   // CIT families: coupling strength of the shared noise
  // Small-alphabet discrete components are emitted as Categorical codes by
  // default; flip to get DiscreteNumeric typing instead.
  bool discrete_as_categorical = true;
  std::uint64_t seed = 0;
};

struct GeneratedSample {
  Dataset dataset;
  VariablePartition partition;
  std::optional<double> truth;     // analytic CMI in nats
  std::optional<bool> h0_holds;    // CIT families only
};

// Deterministic given spec.seed. The coefficient stream (beta draws) is
// separated from the noise stream, so two specs differing only in w share
// every other draw.
GeneratedSample generate(const ModelSpec& spec);

std::optional<double> ground_truth(const ModelSpec& spec);

// CSV plus a <csv_path>.meta.json sidecar carrying the model parameters,
// schema, partition, truth and h0 flag.
void write_generated(const GeneratedSample& sample, const ModelSpec& spec,
                     const std::string& csv_path);

}  // namespace mixcit
