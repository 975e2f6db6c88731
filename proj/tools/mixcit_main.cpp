#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixcit/bench.hpp"
#include "mixcit/cit.hpp"
#include "mixcit/core_math.hpp"
#include "mixcit/errors.hpp"
#include "mixcit/estimators.hpp"
#include "mixcit/models.hpp"
#include "mixcit/parallel.hpp"

namespace {

using namespace mixcit;

std::vector<ColumnKind> parse_types(const std::string& codes) {
  std::vector<ColumnKind> kinds;
  std::istringstream is(codes);
  std::string code;
  while (std::getline(is, code, ',')) kinds.push_back(column_kind_from_code(code));
  if (kinds.empty()) throw ConfigError("--types: no column type codes given");
  return kinds;
}

// nlohmann prints doubles with the shortest representation that round-trips,
// so seeded outputs compare byte-identical across runs
void print_json(const nlohmann::json& doc) { std::cout << doc.dump(2) << '\n'; }

struct EstimateFlags {
  std::string data_path;
  std::string types;
  std::vector<std::size_t> x_cols, y_cols, z_cols;
  std::string estimator = "msinf";
  double k_c = 0.1;
  int explicit_k = 0;
  std::string heuristic = "local";
  std::string prep = "none";
  bool clamp_nonnegative = false;
};

void add_estimate_flags(CLI::App* cmd, EstimateFlags& flags) {
  cmd->add_option("--data", flags.data_path, "input CSV (header row required)")
      ->required();
  cmd->add_option("--types", flags.types,
                  "comma list of column type codes: c (continuous), "
                  "dn (discrete-numeric), cat (categorical)")
      ->required();
  cmd->add_option("--x", flags.x_cols, "X column indices (0-based)")->required();
  cmd->add_option("--y", flags.y_cols, "Y column indices")->required();
  cmd->add_option("--z", flags.z_cols, "Z column indices (may be omitted)");
  cmd->add_option("--estimator", flags.estimator,
                  "ms | msinf | zmadg | ksg | fp | gkov | kl");
  cmd->add_option("--kc", flags.k_c, "k_c in (0,1); turned into k per estimator");
  cmd->add_option("--k", flags.explicit_k, "explicit neighbor count (overrides --kc)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--heuristic", flags.heuristic,
                  "msinf k heuristic: local | global | cluster");
  cmd->add_option("--prep", flags.prep,
                  "preprocessing of continuous columns: none | std | scale | rank");
  cmd->add_flag("--clamp-nonnegative", flags.clamp_nonnegative,
                "clip negative estimates to 0 (off by default)");
}

struct LoadedData {
  Dataset dataset;
  VariablePartition partition;
  EstimatorConfig config;
};

LoadedData load_for_estimation(const EstimateFlags& flags) {
  LoadedData out{load_dataset(flags.data_path, parse_types(flags.types)),
                 VariablePartition{flags.x_cols, flags.y_cols, flags.z_cols},
                 EstimatorConfig{}};
  out.config.kind = estimator_from_name(flags.estimator);
  out.config.k_c = flags.k_c;
  out.config.heuristic = k_heuristic_from_name(flags.heuristic);
  out.config.clamp_nonnegative = flags.clamp_nonnegative;
  if (flags.explicit_k > 0) out.config.explicit_k = flags.explicit_k;
  out.dataset = apply_preprocessing(out.dataset, preprocessing_from_name(flags.prep));
  return out;
}

int cmd_gen(const ModelSpec& spec, const std::string& out_path,
            const std::string& json_data_path) {
  const GeneratedSample sample = generate(spec);
  write_generated(sample, spec, out_path);
  if (!json_data_path.empty()) save_dataset_json(sample.dataset, json_data_path);

  nlohmann::json doc;
  doc["csv"] = out_path;
  doc["meta"] = out_path + ".meta.json";
  doc["n"] = sample.dataset.n_rows();
  if (sample.truth) doc["truth"] = *sample.truth;
  if (sample.h0_holds) doc["h0_holds"] = *sample.h0_holds;
  print_json(doc);
  return 0;
}

int cmd_estimate(const EstimateFlags& flags) {
  const LoadedData data = load_for_estimation(flags);
  const auto start = std::chrono::steady_clock::now();
  const CmiEstimate est = estimate_cmi(data.dataset, data.partition, data.config);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json doc;
  doc["estimator"] = flags.estimator;
  doc["value_nats"] = est.value;
  doc["zero_rows"] = est.zero_rows;
  if (est.dropped_clusters) doc["dropped_clusters"] = est.dropped_clusters;
  doc["runtime_s"] = runtime;
  print_json(doc);
  return 0;
}

int cmd_citest(const EstimateFlags& flags, int perms, int k_perm, double alpha,
               std::uint64_t seed) {
  const LoadedData data = load_for_estimation(flags);
  CitConfig cfg;
  cfg.permutations = perms;
  cfg.k_perm = k_perm;
  cfg.alpha = alpha;
  cfg.seed = seed;
  cfg.estimator = data.config;
  cfg.threads = thread_budget();
  const CitResult res = run_cit(data.dataset, data.partition, cfg);

  nlohmann::json doc;
  doc["estimator"] = flags.estimator;
  doc["t_obs"] = res.t_obs;
  doc["p_value"] = res.p_value;
  doc["reject"] = res.reject;
  doc["alpha"] = alpha;
  doc["permutations"] = perms;
  doc["t_perm"] = res.t_perm;
  print_json(doc);
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, bool cit) {
  const SweepSpec spec = sweep_spec_from_json_file(spec_path);
  SweepFiles files;
  if (cit)
    files = write_cit_sweep(run_cit_sweep(spec), out_dir);
  else
    files = write_cmi_sweep(run_cmi_sweep(spec), out_dir);
  nlohmann::json doc;
  doc["csv"] = files.csv;
  doc["json"] = files.json;
  print_json(doc);
  return 0;
}

// ---- selftest: quick checks over the analytically pinned examples ----

int failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) ++failures;
}

void check_near(double got, double want, double tol, const std::string& what) {
  std::ostringstream os;
  os << what << " (got " << got << ", want " << want << " +/- " << tol << ")";
  check(std::fabs(got - want) <= tol, os.str());
}

Dataset tiny_mixed_dataset() {
  Column x{"x", ColumnKind::Continuous, {0.1, 0.2, 0.4, 0.8, 0.9, 0.3}};
  Column y{"y", ColumnKind::Continuous, {0.5, 0.1, 0.6, 0.2, 0.8, 0.4}};
  Column z{"z", ColumnKind::Categorical, {0, 0, 0, 1, 1, 1}};
  return Dataset({x, y, z});
}

int cmd_selftest() {
  failures = 0;

  check_near(digamma(1.0), -euler_gamma, 1e-10, "digamma(1) = -gamma");
  check_near(digamma(2.0), 1.0 - euler_gamma, 1e-10, "digamma(2) = 1 - gamma");
  check_near(digamma(0.5), -euler_gamma - 2.0 * std::log(2.0), 1e-10,
             "digamma(0.5) = -gamma - 2 ln 2");
  check_near(log_unit_ball_volume(3), 3.0 * std::log(2.0), 1e-15,
             "log unit ball volume, dim 3");

  {
    Column a{"a", ColumnKind::Continuous, {1, 2, 3}};
    Dataset std_ds = apply_preprocessing(Dataset({a}), Preprocessing::Standardize);
    double mean = 0;
    for (double v : std_ds.column(0).values) mean += v;
    check_near(mean / 3.0, 0.0, 1e-12, "standardize: mean 0");

    Column b{"b", ColumnKind::Continuous, {2, 4, 6}};
    Dataset scaled = apply_preprocessing(Dataset({b}), Preprocessing::ScaleToUnit);
    check(scaled.column(0).values == std::vector<double>({0.0, 0.5, 1.0}),
          "scale-to-unit: [2,4,6] -> [0, 0.5, 1]");

    Column c{"c", ColumnKind::Continuous, {5, 1, 3}};
    Dataset ranked = apply_preprocessing(Dataset({c}), Preprocessing::RankTransform);
    check(ranked.column(0).values ==
              std::vector<double>({1.0, 1.0 / 3.0, 2.0 / 3.0}),
          "rank transform: [5,1,3] -> [1, 1/3, 2/3]");
  }

  {
    const Dataset ds = tiny_mixed_dataset();
    ProjectedView view(ds, std::vector<std::size_t>{0, 2});
    check_near(ms_distance(view.point(0), view.point(1)), 0.1, 1e-15,
               "ms distance: same cluster, numeric gap");
    check(zero_inf_distance(view.point(0), view.point(3)) ==
              std::numeric_limits<double>::infinity(),
          "0-inf distance: cluster mismatch is +inf");
    check(count_within(view, 0, std::numeric_limits<double>::infinity(),
                       Metric::ZeroInf, Boundary::Strict) == ds.n_rows() - 1,
          "count_within at rho = +inf counts everything");
  }

  check_near(permutation_pvalue(2.0, std::vector<double>{0.1, 0.2, 0.3, 2.5}),
             0.25, 1e-15, "permutation p-value example");

  {
    ModelSpec spec;
    spec.family = ModelFamily::IndepZEst;
    spec.c = 5;
    spec.d = 1;
    spec.n = 200;
    spec.seed = 7;
    const GeneratedSample a = generate(spec);
    const GeneratedSample b = generate(spec);
    check(a.dataset.column(1).values == b.dataset.column(1).values,
          "generation is seed-deterministic");
    check_near(*a.truth, std::log(5.0) - 0.8 * std::log(2.0), 1e-12,
               "independent-Z ground truth");
  }

  {
    // single cluster and a shared k make the one-hot and 0-inf paths agree
    Column x{"x", ColumnKind::Continuous, {0.11, 0.42, 0.73, 0.24, 0.85, 0.36, 0.57, 0.68}};
    Column y{"y", ColumnKind::Continuous, {0.31, 0.62, 0.13, 0.44, 0.75, 0.26, 0.87, 0.58}};
    Column z{"z", ColumnKind::Continuous, {0.21, 0.52, 0.83, 0.14, 0.45, 0.76, 0.37, 0.69}};
    Dataset ds({x, y, z});
    VariablePartition part{{0}, {1}, {2}};
    EstimatorConfig cfg;
    cfg.explicit_k = 2;
    cfg.kind = EstimatorKind::MS;
    const double ms = ms_cmi(ds, part, cfg).value;
    cfg.kind = EstimatorKind::MSInf;
    const double msinf = msinf_cmi(ds, part, cfg).value;
    check(ms == msinf, "ms == msinf on a single all-continuous cluster");
  }

  {
    const auto [lo, hi] = binomial_ci(0, 100, 0.05);
    check(lo == 0.0, "binomial_ci(0, 100): lower bound 0");
    const auto [lo2, hi2] = binomial_ci(100, 100, 0.05);
    check(hi2 == 1.0, "binomial_ci(100, 100): upper bound 1");
  }

  std::printf(failures == 0 ? "selftest passed\n" : "selftest FAILED (%d)\n",
              failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixcit: conditional mutual information estimation and "
               "conditional independence testing for mixed "
               "continuous-categorical data. All values are in nats."};
  app.require_subcommand(1);

  // gen
  ModelSpec gen_spec;
  std::string gen_family = "indepz-est";
  std::string gen_out;
  std::string gen_json_data;
  bool gen_dn = false;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--model", gen_family,
                  "indepz-est | chain-est | confgauss-est | confunif-est | "
                  "mixture-est | confounder-cit | indepz-cit | "
                  "clusterconf-cit | chain-cit")
      ->required();
  gen->add_option("--n", gen_spec.n, "sample count")->required();
  gen->add_option("--c", gen_spec.c, "independent-Z: discrete X values");
  gen->add_option("--d", gen_spec.d, "Z dimension (estimation models)");
  gen->add_option("--m", gen_spec.m, "confgauss-est: Z ~ U{0..m}");
  gen->add_option("--p", gen_spec.p, "mixture-est: discrete-branch weight");
  gen->add_option("--dim-c", gen_spec.dim_c, "confounder-cit: continuous Z dims");
  gen->add_option("--dim-d", gen_spec.dim_d, "CIT models: discrete Z dims");
  gen->add_option("--n-classes", gen_spec.n_classes, "CIT models: classes per discrete Z");
  gen->add_option("--w", gen_spec.w, "CIT models: coupling strength");
  gen->add_flag("--discrete-numeric", gen_dn,
                "type small-alphabet discrete columns as dn instead of cat");
  gen->add_option("--seed", gen_spec.seed, "RNG seed")->required();
  gen->add_option("--out", gen_out, "output CSV path")->required();
  gen->add_option("--json-data", gen_json_data, "also write the dataset as JSON");

  // estimate
  EstimateFlags est_flags;
  CLI::App* est = app.add_subcommand("estimate", "estimate CMI on a CSV dataset");
  add_estimate_flags(est, est_flags);

  // citest
  EstimateFlags cit_flags;
  int cit_perms = 100;
  int cit_k_perm = 5;
  double cit_alpha = 0.05;
  std::uint64_t cit_seed = 0;
  CLI::App* cit = app.add_subcommand(
      "citest", "permutation test of X indep Y given Z on a CSV dataset");
  add_estimate_flags(cit, cit_flags);
  cit->add_option("--perms", cit_perms, "number of permuted surrogates B");
  cit->add_option("--k-perm", cit_k_perm, "neighbor count for continuous-Z pools");
  cit->add_option("--alpha", cit_alpha, "nominal level");
  cit->add_option("--seed", cit_seed, "RNG seed")->required();

  // sweeps
  std::string sweep_spec_path, sweep_out_dir = ".";
  CLI::App* sweep_cmi = app.add_subcommand(
      "sweep-cmi", "bias/variance sweep driven by a JSON sweep spec");
  sweep_cmi->add_option("--spec", sweep_spec_path, "sweep spec JSON")->required();
  sweep_cmi->add_option("--out-dir", sweep_out_dir, "output directory");

  std::string cit_sweep_spec_path, cit_sweep_out_dir = ".";
  CLI::App* sweep_cit = app.add_subcommand(
      "sweep-cit", "FPR/TPR sweep driven by a JSON sweep spec");
  sweep_cit->add_option("--spec", cit_sweep_spec_path, "sweep spec JSON")->required();
  sweep_cit->add_option("--out-dir", cit_sweep_out_dir, "output directory");

  CLI::App* selftest =
      app.add_subcommand("selftest", "run the built-in example checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      gen_spec.family = model_family_from_name(gen_family);
      gen_spec.discrete_as_categorical = !gen_dn;
      return cmd_gen(gen_spec, gen_out, gen_json_data);
    }
    if (est->parsed()) return cmd_estimate(est_flags);
    if (cit->parsed())
      return cmd_citest(cit_flags, cit_perms, cit_k_perm, cit_alpha, cit_seed);
    if (sweep_cmi->parsed()) return cmd_sweep(sweep_spec_path, sweep_out_dir, false);
    if (sweep_cit->parsed()) return cmd_sweep(cit_sweep_spec_path, cit_sweep_out_dir, true);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
