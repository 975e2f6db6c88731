#include "mixcit/models.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "mixcit/errors.hpp"
#include "mixcit/random.hpp"

namespace mixcit {

namespace {

double inverse_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ColumnKind discrete_kind(const ModelSpec& spec) {
  return spec.discrete_as_categorical ? ColumnKind::Categorical
                                      : ColumnKind::DiscreteNumeric;
}

void check_common(const ModelSpec& spec) {
  if (spec.n < 1) throw ConfigError("model: n must be >= 1");
  if (spec.w < 0.0) throw ConfigError("model: w must be >= 0");
}

Column make_column(std::string name, ColumnKind kind, std::size_t n) {
  Column col;
  col.name = std::move(name);
  col.kind = kind;
  col.values.resize(n);
  return col;
}

VariablePartition xyz_partition(std::size_t z_dims) {
  VariablePartition part;
  part.x_cols = {0};
  part.y_cols = {1};
  for (std::size_t j = 0; j < z_dims; ++j) part.z_cols.push_back(2 + j);
  return part;
}

// multinomial over {0..classes-1} with weights exp(a * v)
int softmax_category(Rng& rng, double v, int classes) {
  std::vector<double> weights(classes);
  double top = 0.0;
  for (int a = 0; a < classes; ++a) top = std::max(top, a * v);
  for (int a = 0; a < classes; ++a) weights[a] = std::exp(a * v - top);
  return rng.categorical(weights);
}

GeneratedSample generate_indepz_est(const ModelSpec& spec) {
  if (spec.c < 1) throw ConfigError("indepz-est: c must be >= 1");
  if (spec.d < 1) throw ConfigError("indepz-est: d must be >= 1");
  Rng noise(derive_seed(spec.seed, 0x01));

  std::vector<Column> cols;
  cols.push_back(make_column("X", discrete_kind(spec), spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  for (int j = 0; j < spec.d; ++j)
    cols.push_back(make_column("Z" + std::to_string(j + 1), discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x = static_cast<double>(noise.below(static_cast<std::uint64_t>(spec.c)));
    cols[0].values[i] = x;
    cols[1].values[i] = x + 2.0 * noise.uniform();
    for (int j = 0; j < spec.d; ++j)
      cols[2 + j].values[i] = noise.bernoulli(0.5);
  }

  GeneratedSample out{Dataset(std::move(cols)), xyz_partition(spec.d),
                      ground_truth(spec), std::nullopt};
  return out;
}

GeneratedSample generate_chain_est(const ModelSpec& spec) {
  if (spec.d < 1) throw ConfigError("chain-est: d must be >= 1");
  Rng noise(derive_seed(spec.seed, 0x01));

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::DiscreteNumeric, spec.n));
  cols.push_back(make_column("Z1", ColumnKind::DiscreteNumeric, spec.n));
  for (int j = 1; j < spec.d; ++j)
    cols.push_back(make_column("Z" + std::to_string(j + 1), ColumnKind::Continuous, spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x = noise.exponential(10.0);
    const int z1 = noise.poisson(x);
    cols[0].values[i] = x;
    cols[1].values[i] = noise.binomial(z1, 0.5);
    cols[2].values[i] = z1;
    for (int j = 1; j < spec.d; ++j) cols[2 + j].values[i] = noise.normal();
  }

  return {Dataset(std::move(cols)), xyz_partition(spec.d), 0.0, std::nullopt};
}

GeneratedSample generate_confgauss_est(const ModelSpec& spec) {
  if (spec.m < 0) throw ConfigError("confgauss-est: m must be >= 0");
  Rng noise(derive_seed(spec.seed, 0x01));

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Z", discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const double z = static_cast<double>(noise.below(static_cast<std::uint64_t>(spec.m + 1)));
    cols[0].values[i] = z + noise.normal();
    cols[1].values[i] = z + noise.normal();
    cols[2].values[i] = z;
  }

  return {Dataset(std::move(cols)), xyz_partition(1), 0.0, std::nullopt};
}

GeneratedSample generate_confunif_est(const ModelSpec& spec) {
  Rng noise(derive_seed(spec.seed, 0x01));

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Z", discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const double z = static_cast<double>(noise.below(2));
    // X ~ U(0, Z): degenerate at 0 in the Z = 0 cluster
    cols[0].values[i] = z * noise.uniform();
    cols[1].values[i] = z + noise.uniform();
    cols[2].values[i] = z;
  }

  return {Dataset(std::move(cols)), xyz_partition(1), 0.0, std::nullopt};
}

GeneratedSample generate_mixture_est(const ModelSpec& spec) {
  if (!(spec.p > 0.0 && spec.p < 1.0))
    throw ConfigError("mixture-est: p must lie in (0, 1)");
  Rng noise(derive_seed(spec.seed, 0x01));
  const double rho = 0.6;

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Z", discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const int z = noise.bernoulli(spec.p);
    cols[2].values[i] = z;
    if (z == 1) {
      const double x = static_cast<double>(noise.below(5));
      cols[0].values[i] = x;
      cols[1].values[i] = x + 2.0 * noise.uniform();
    } else {
      const double g1 = noise.normal();
      const double g2 = noise.normal();
      cols[0].values[i] = g1;
      cols[1].values[i] = rho * g1 + std::sqrt(1.0 - rho * rho) * g2;
    }
  }

  return {Dataset(std::move(cols)), xyz_partition(1), ground_truth(spec),
          std::nullopt};
}

GeneratedSample generate_confounder_cit(const ModelSpec& spec) {
  if (spec.dim_d < 0 || spec.dim_c < 0 || spec.dim_d + spec.dim_c < 1)
    throw ConfigError("confounder-cit: needs at least one Z dimension");
  if (spec.n_classes < 2) throw ConfigError("confounder-cit: n_classes must be >= 2");

  Rng beta(derive_seed(spec.seed, 0x02));
  Rng noise(derive_seed(spec.seed, 0x01));
  const int m = spec.dim_d + spec.dim_c;

  std::vector<double> beta_x(m), beta_y(m);
  for (int j = 0; j < m; ++j) beta_x[j] = beta.uniform(-1.0, 1.0);
  for (int j = 0; j < m; ++j) beta_y[j] = beta.uniform(-1.0, 1.0);

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  for (int j = 0; j < spec.dim_d; ++j)
    cols.push_back(make_column("Z" + std::to_string(j + 1), discrete_kind(spec), spec.n));
  for (int j = 0; j < spec.dim_c; ++j)
    cols.push_back(make_column("Z" + std::to_string(spec.dim_d + j + 1),
                               ColumnKind::Continuous, spec.n));

  std::vector<double> z(m);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.dim_d; ++j)
      z[j] = noise.binomial(spec.n_classes - 1, 0.5);
    for (int j = spec.dim_d; j < m; ++j) z[j] = noise.normal();
    const double eta_x = noise.normal();
    const double eta_y = noise.normal();
    const double eta_w = noise.normal();

    double base_x = 0.0, base_y = 0.0;
    for (int j = 0; j < spec.dim_d; ++j) {
      base_x += beta_x[j] * inverse_logit(z[j]);
      base_y += beta_y[j] * inverse_logit(z[j]);
    }
    for (int j = spec.dim_d; j < m; ++j) {
      base_x += beta_x[j] * z[j];
      base_y += beta_y[j] * z[j];
    }
    cols[0].values[i] = base_x + eta_x + spec.w * eta_w;
    cols[1].values[i] = base_y + eta_y + spec.w * eta_w;
    for (int j = 0; j < m; ++j) cols[2 + j].values[i] = z[j];
  }

  return {Dataset(std::move(cols)), xyz_partition(m), std::nullopt,
          spec.w == 0.0};
}

GeneratedSample generate_indepz_cit(const ModelSpec& spec) {
  if (spec.dim_d < 1) throw ConfigError("indepz-cit: dim_d must be >= 1");
  if (spec.n_classes < 2) throw ConfigError("indepz-cit: n_classes must be >= 2");
  Rng noise(derive_seed(spec.seed, 0x01));

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  for (int j = 0; j < spec.dim_d; ++j)
    cols.push_back(make_column("Z" + std::to_string(j + 1), discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.dim_d; ++j)
      cols[2 + j].values[i] = noise.binomial(spec.n_classes - 1, 0.5);
    const double eta_x = noise.normal();
    const double eta_y = noise.normal();
    const double eta_w = noise.normal();
    cols[0].values[i] = eta_x + spec.w * eta_w;
    cols[1].values[i] = eta_y + spec.w * eta_w;
  }

  return {Dataset(std::move(cols)), xyz_partition(spec.dim_d), std::nullopt,
          spec.w == 0.0};
}

GeneratedSample generate_clusterconf_cit(const ModelSpec& spec) {
  if (spec.n_classes < 2) throw ConfigError("clusterconf-cit: n_classes must be >= 2");
  Rng beta(derive_seed(spec.seed, 0x02));
  Rng noise(derive_seed(spec.seed, 0x01));

  const double beta_x = beta.uniform(-1.0, 1.0);
  const double beta_y = beta.uniform(-1.0, 1.0);

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Z", discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const int z = noise.binomial(spec.n_classes - 1, 0.5);
    const double eta_x = noise.normal();
    const double eta_y = noise.normal();
    const double eta_w = noise.normal();
    // the shared noise couples X and Y only inside the Z = 0 cluster
    const double w_eff = z == 0 ? spec.w : 0.0;
    cols[0].values[i] = beta_x * inverse_logit(z) + eta_x + w_eff * eta_w;
    cols[1].values[i] = beta_y * inverse_logit(z) + eta_y + w_eff * eta_w;
    cols[2].values[i] = z;
  }

  return {Dataset(std::move(cols)), xyz_partition(1), std::nullopt,
          spec.w == 0.0};
}

GeneratedSample generate_chain_cit(const ModelSpec& spec) {
  if (spec.n_classes < 2) throw ConfigError("chain-cit: n_classes must be >= 2");
  Rng beta(derive_seed(spec.seed, 0x02));
  Rng noise(derive_seed(spec.seed, 0x01));

  const double beta_x = beta.uniform(-1.0, 1.0);
  const double beta_y = beta.uniform(-1.0, 1.0);
  const int classes = spec.n_classes - 1;  // multinomial range, kept verbatim

  std::vector<Column> cols;
  cols.push_back(make_column("X", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Y", ColumnKind::Continuous, spec.n));
  cols.push_back(make_column("Z", discrete_kind(spec), spec.n));

  for (std::size_t i = 0; i < spec.n; ++i) {
    const double eta_x = noise.normal();
    const double eta_w = noise.normal();
    const double x = eta_x + spec.w * eta_w;
    const int core = softmax_category(noise, beta_x * x, classes);
    const int eta_z = noise.binomial(2, 0.7);
    const int z = (core + eta_z) % classes;
    const double eta_y = noise.normal();
    cols[0].values[i] = x;
    cols[1].values[i] = beta_y * inverse_logit(z) + eta_y + spec.w * eta_w;
    cols[2].values[i] = z;
  }

  return {Dataset(std::move(cols)), xyz_partition(1), std::nullopt,
          spec.w == 0.0};
}

}  // namespace

std::string_view model_family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::IndepZEst: return "indepz-est";
    case ModelFamily::ChainStructEst: return "chain-est";
    case ModelFamily::ConfGaussEst: return "confgauss-est";
    case ModelFamily::ConfUnifEst: return "confunif-est";
    case ModelFamily::MixtureEst: return "mixture-est";
    case ModelFamily::ConfounderCit: return "confounder-cit";
    case ModelFamily::IndepZCit: return "indepz-cit";
    case ModelFamily::ClusterConfCit: return "clusterconf-cit";
    case ModelFamily::ChainCit: return "chain-cit";
  }
  return "?";
}

ModelFamily model_family_from_name(std::string_view name) {
  if (name == "indepz-est") return ModelFamily::IndepZEst;
  if (name == "chain-est") return ModelFamily::ChainStructEst;
  if (name == "confgauss-est") return ModelFamily::ConfGaussEst;
  if (name == "confunif-est") return ModelFamily::ConfUnifEst;
  if (name == "mixture-est") return ModelFamily::MixtureEst;
  if (name == "confounder-cit") return ModelFamily::ConfounderCit;
  if (name == "indepz-cit") return ModelFamily::IndepZCit;
  if (name == "clusterconf-cit") return ModelFamily::ClusterConfCit;
  if (name == "chain-cit") return ModelFamily::ChainCit;
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

bool is_cit_family(ModelFamily f) {
  switch (f) {
    case ModelFamily::ConfounderCit:
    case ModelFamily::IndepZCit:
    case ModelFamily::ClusterConfCit:
    case ModelFamily::ChainCit:
      return true;
    default:
      return false;
  }
}

GeneratedSample generate(const ModelSpec& spec) {
  check_common(spec);
  switch (spec.family) {
    case ModelFamily::IndepZEst: return generate_indepz_est(spec);
    case ModelFamily::ChainStructEst: return generate_chain_est(spec);
    case ModelFamily::ConfGaussEst: return generate_confgauss_est(spec);
    case ModelFamily::ConfUnifEst: return generate_confunif_est(spec);
    case ModelFamily::MixtureEst: return generate_mixture_est(spec);
    case ModelFamily::ConfounderCit: return generate_confounder_cit(spec);
    case ModelFamily::IndepZCit: return generate_indepz_cit(spec);
    case ModelFamily::ClusterConfCit: return generate_clusterconf_cit(spec);
    case ModelFamily::ChainCit: return generate_chain_cit(spec);
  }
  throw ConfigError("unknown model family");
}

std::optional<double> ground_truth(const ModelSpec& spec) {
  switch (spec.family) {
    case ModelFamily::IndepZEst: {
      const double c = static_cast<double>(spec.c);
      return std::log(c) - (c - 1.0) / c * std::log(2.0);
    }
    case ModelFamily::ChainStructEst:
    case ModelFamily::ConfGaussEst:
    case ModelFamily::ConfUnifEst:
      return 0.0;
    case ModelFamily::MixtureEst:
      return -(1.0 - spec.p) * std::log(1.0 - 0.36) * 0.5 +
             spec.p * (std::log(5.0) - 0.8 * std::log(2.0));
    default:
      return std::nullopt;
  }
}

void write_generated(const GeneratedSample& sample, const ModelSpec& spec,
                     const std::string& csv_path) {
  save_dataset_csv(sample.dataset, csv_path);

  nlohmann::json meta;
  meta["model"] = std::string(model_family_name(spec.family));
  meta["n"] = spec.n;
  meta["seed"] = spec.seed;
  meta["params"] = {
      {"c", spec.c},         {"d", spec.d},
      {"m", spec.m},         {"p", spec.p},
      {"dim_c", spec.dim_c}, {"dim_d", spec.dim_d},
      {"n_classes", spec.n_classes}, {"w", spec.w},
      {"discrete_as_categorical", spec.discrete_as_categorical}};
  if (sample.truth)
    meta["truth"] = *sample.truth;
  else
    meta["truth"] = nullptr;
  if (sample.h0_holds)
    meta["h0_holds"] = *sample.h0_holds;
  else
    meta["h0_holds"] = nullptr;

  nlohmann::json schema = nlohmann::json::array();
  for (const Column& col : sample.dataset.columns())
    schema.push_back({{"name", col.name},
                      {"kind", std::string(column_kind_code(col.kind))}});
  meta["schema"] = std::move(schema);
  meta["partition"] = {{"x", sample.partition.x_cols},
                       {"y", sample.partition.y_cols},
                       {"z", sample.partition.z_cols}};

  std::ofstream out(csv_path + ".meta.json");
  if (!out) throw DataError("cannot write '" + csv_path + ".meta.json'");
  out << meta.dump(2) << '\n';
}

}  // namespace mixcit
