#include "mixcit/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mixcit/cit.hpp"
#include "mixcit/errors.hpp"
#include "mixcit/parallel.hpp"
#include "mixcit/random.hpp"

namespace mixcit {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::vector<SweepCell> enumerate_cells(const SweepSpec& spec) {
  if (spec.estimators.empty() || spec.k_c_grid.empty() || spec.n_grid.empty())
    throw ConfigError("sweep: estimators, k_c_grid and n_grid must be non-empty");
  if (spec.repetitions < 1) throw ConfigError("sweep: repetitions must be >= 1");

  std::vector<Preprocessing> preps = spec.preprocessing;
  if (preps.empty()) preps.push_back(Preprocessing::None);

  std::vector<SweepCell> cells;
  for (const EstimatorConfig& est : spec.estimators)
    for (double k_c : spec.k_c_grid)
      for (std::size_t n : spec.n_grid)
        for (Preprocessing prep : preps)
          cells.push_back({est.kind, est.heuristic, k_c, n, prep});
  return cells;
}

EstimatorConfig cell_estimator(const SweepCell& cell) {
  EstimatorConfig cfg;
  cfg.kind = cell.estimator;
  cfg.heuristic = cell.heuristic;
  cfg.k_c = cell.k_c;
  return cfg;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%S", &tm);
  return buf;
}

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::string csv_escape(const std::string& s) {
  std::string out;
  for (char c : s) out += (c == ',' || c == '\n') ? ' ' : c;
  return out;
}

nlohmann::json cell_json(const SweepCell& cell) {
  return {{"estimator", std::string(estimator_name(cell.estimator))},
          {"heuristic", std::string(k_heuristic_name(cell.heuristic))},
          {"k_c", cell.k_c},
          {"n", cell.n},
          {"preprocessing", std::string(preprocessing_name(cell.prep))}};
}

SweepFiles open_sweep_files(const std::string& dir, const std::string& name,
                            const std::string& tag) {
  std::filesystem::create_directories(dir);
  const std::string stem = name + "_" + (tag.empty() ? utc_timestamp() : tag);
  return {dir + "/" + stem + ".csv", dir + "/" + stem + ".json"};
}

}  // namespace

CmiSweepResult run_cmi_sweep(const SweepSpec& spec) {
  if (is_cit_family(spec.model.family))
    throw ConfigError("cmi sweep: needs an estimation-family model with a "
                      "known ground truth");

  CmiSweepResult result;
  result.spec = spec;
  result.cells = enumerate_cells(spec);

  const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
  const std::size_t total = result.cells.size() * reps;
  result.rows.resize(total);

  parallel_for(total, [&](std::size_t idx) {
    const std::size_t ci = idx / reps;
    const int rep = static_cast<int>(idx % reps);
    const SweepCell& cell = result.cells[ci];

    ModelSpec model = spec.model;
    model.n = cell.n;
    model.seed = derive_seed(spec.master_seed, ci, static_cast<std::uint64_t>(rep));

    CmiSweepRow row{};
    row.cell = ci;
    row.rep = rep;
    row.seed = model.seed;
    try {
      const GeneratedSample sample = generate(model);
      if (!sample.truth)
        throw ConfigError("cmi sweep: model has no analytic ground truth");
      row.truth = *sample.truth;
      const Dataset prepped = apply_preprocessing(sample.dataset, cell.prep);
      const auto start = clock_type::now();
      row.estimate =
          estimate_cmi(prepped, sample.partition, cell_estimator(cell)).value;
      row.runtime_s = seconds_since(start);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    result.rows[idx] = std::move(row);
  });

  for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
    CmiCellSummary summary;
    summary.cell = result.cells[ci];
    double sum = 0.0, abs_err = 0.0, runtime = 0.0;
    std::vector<double> values;
    for (std::size_t r = 0; r < reps; ++r) {
      const CmiSweepRow& row = result.rows[ci * reps + r];
      if (!row.ok) {
        ++summary.n_failed;
        continue;
      }
      ++summary.n_ok;
      sum += row.estimate;
      abs_err += std::fabs(row.estimate - row.truth);
      runtime += row.runtime_s;
      values.push_back(row.estimate);
    }
    if (summary.n_ok > 0) {
      summary.mean = sum / summary.n_ok;
      summary.mae = abs_err / summary.n_ok;
      summary.mean_runtime_s = runtime / summary.n_ok;
    }
    if (summary.n_ok >= 2) {
      double ss = 0.0;
      for (double v : values) ss += (v - summary.mean) * (v - summary.mean);
      summary.variance = ss / (summary.n_ok - 1);
    }
    result.summaries.push_back(std::move(summary));
  }
  return result;
}

CitSweepResult run_cit_sweep(const SweepSpec& spec) {
  if (!is_cit_family(spec.model.family))
    throw ConfigError("cit sweep: needs a CIT-family model");

  CitSweepResult result;
  result.spec = spec;
  result.cells = enumerate_cells(spec);

  const bool with_alternative = spec.model.w > 0.0;
  const std::size_t reps = static_cast<std::size_t>(spec.repetitions);
  const std::size_t arms = with_alternative ? 2 : 1;
  const std::size_t total = result.cells.size() * reps * arms;
  result.rows.resize(total);

  parallel_for(total, [&](std::size_t idx) {
    const std::size_t ci = idx / (reps * arms);
    const std::size_t rem = idx % (reps * arms);
    const int rep = static_cast<int>(rem / arms);
    const bool alternative = (rem % arms) == 1;
    const SweepCell& cell = result.cells[ci];

    ModelSpec model = spec.model;
    model.n = cell.n;
    model.w = alternative ? spec.model.w : 0.0;
    // null and alternative arms share the data seed so they differ only
    // through the coupling term
    model.seed = derive_seed(spec.master_seed, ci, static_cast<std::uint64_t>(rep));

    CitSweepRow row{};
    row.cell = ci;
    row.rep = rep;
    row.alternative = alternative;
    row.seed = model.seed;
    try {
      const GeneratedSample sample = generate(model);
      const Dataset prepped = apply_preprocessing(sample.dataset, cell.prep);
      CitConfig cfg;
      cfg.permutations = spec.permutations;
      cfg.k_perm = spec.k_perm;
      cfg.alpha = spec.alpha;
      cfg.seed = derive_seed(spec.master_seed, ci, static_cast<std::uint64_t>(rep), 0xC17);
      cfg.estimator = cell_estimator(cell);
      const auto start = clock_type::now();
      const CitResult cit = run_cit(prepped, sample.partition, cfg);
      row.runtime_s = seconds_since(start);
      row.t_obs = cit.t_obs;
      row.p_value = cit.p_value;
      row.reject = cit.reject;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    result.rows[idx] = std::move(row);
  });

  for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
    RateReport report;
    report.cell = result.cells[ci];
    double runtime = 0.0;
    int timed = 0;
    for (std::size_t r = 0; r < reps * arms; ++r) {
      const CitSweepRow& row = result.rows[ci * reps * arms + r];
      if (!row.ok) continue;
      runtime += row.runtime_s;
      ++timed;
      if (row.alternative) {
        ++report.n_alt;
        if (row.reject) ++report.tp_count;
      } else {
        ++report.n_null;
        if (row.reject) ++report.fp_count;
      }
    }
    if (report.n_null > 0) {
      report.fpr = static_cast<double>(report.fp_count) / report.n_null;
      std::tie(report.fpr_ci_low, report.fpr_ci_high) =
          binomial_ci(report.fp_count, report.n_null, 0.05);
    }
    if (report.n_alt > 0) {
      report.tpr = static_cast<double>(report.tp_count) / report.n_alt;
      std::tie(report.tpr_ci_low, report.tpr_ci_high) =
          binomial_ci(report.tp_count, report.n_alt, 0.05);
    }
    if (timed > 0) report.mean_runtime_s = runtime / timed;
    result.reports.push_back(report);
  }
  return result;
}

namespace {

// log Binomial(n, k) via a cumulative log-factorial table
class LogBinomTable {
 public:
  explicit LogBinomTable(int n) : log_fact_(n + 1, 0.0) {
    for (int i = 1; i <= n; ++i)
      log_fact_[i] = log_fact_[i - 1] + std::log(static_cast<double>(i));
  }
  double log_choose(int n, int k) const {
    return log_fact_[n] - log_fact_[k] - log_fact_[n - k];
  }

 private:
  std::vector<double> log_fact_;
};

// P(X <= k) for X ~ Bin(n, p)
double binomial_cdf(const LogBinomTable& table, int k, int n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double sum = 0.0;
  for (int i = 0; i <= k; ++i)
    sum += std::exp(table.log_choose(n, i) + i * lp + (n - i) * lq);
  return std::min(sum, 1.0);
}

}  // namespace

std::pair<double, double> binomial_ci(int successes, int trials, double alpha) {
  if (trials < 1) throw ConfigError("binomial_ci: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw ConfigError("binomial_ci: successes out of range");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("binomial_ci: alpha must lie in (0, 1)");

  const LogBinomTable table(trials);
  const double tail = alpha / 2.0;

  auto bisect = [&](auto f) {
    // f is monotone over [0, 1] with a sign change; 60 halvings reach well
    // past the 1e-8 target
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid)) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  };

  double low = 0.0;
  if (successes > 0) {
    // P(X >= s; p) grows in p; the bound solves it equal to alpha/2
    low = bisect([&](double p) {
      return 1.0 - binomial_cdf(table, successes - 1, trials, p) >= tail;
    });
  }
  double high = 1.0;
  if (successes < trials) {
    // P(X <= s; p) falls in p
    high = bisect([&](double p) {
      return binomial_cdf(table, successes, trials, p) <= tail;
    });
  }
  return {low, high};
}

SweepSpec sweep_spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw DataError("cannot parse '" + path + "': " + e.what());
  }

  SweepSpec spec;
  try {
    spec.name = doc.value("name", std::string("sweep"));

    const nlohmann::json& jm = doc.at("model");
    spec.model.family = model_family_from_name(jm.at("family").get<std::string>());
    spec.model.n = jm.value("n", std::size_t{0});
    spec.model.c = jm.value("c", spec.model.c);
    spec.model.d = jm.value("d", spec.model.d);
    spec.model.m = jm.value("m", spec.model.m);
    spec.model.p = jm.value("p", spec.model.p);
    spec.model.dim_c = jm.value("dim_c", spec.model.dim_c);
    spec.model.dim_d = jm.value("dim_d", spec.model.dim_d);
    spec.model.n_classes = jm.value("n_classes", spec.model.n_classes);
    spec.model.w = jm.value("w", spec.model.w);
    spec.model.discrete_as_categorical =
        jm.value("discrete_as_categorical", true);

    for (const auto& je : doc.at("estimators")) {
      EstimatorConfig cfg;
      cfg.kind = estimator_from_name(je.at("kind").get<std::string>());
      if (je.contains("heuristic"))
        cfg.heuristic = k_heuristic_from_name(je.at("heuristic").get<std::string>());
      spec.estimators.push_back(cfg);
    }

    spec.k_c_grid = doc.at("k_c_grid").get<std::vector<double>>();
    spec.n_grid = doc.at("n_grid").get<std::vector<std::size_t>>();
    if (doc.contains("preprocessing"))
      for (const auto& jp : doc.at("preprocessing"))
        spec.preprocessing.push_back(
            preprocessing_from_name(jp.get<std::string>()));

    spec.repetitions = doc.value("repetitions", 1);
    spec.permutations = doc.value("permutations", 100);
    spec.k_perm = doc.value("k_perm", 5);
    spec.alpha = doc.value("alpha", 0.05);
    spec.master_seed = doc.value("master_seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("sweep spec '" + path + "': " + e.what());
  }
  return spec;
}

namespace {

nlohmann::json spec_json(const SweepSpec& spec) {
  nlohmann::json js;
  js["name"] = spec.name;
  js["model"] = {{"family", std::string(model_family_name(spec.model.family))},
                 {"c", spec.model.c},
                 {"d", spec.model.d},
                 {"m", spec.model.m},
                 {"p", spec.model.p},
                 {"dim_c", spec.model.dim_c},
                 {"dim_d", spec.model.dim_d},
                 {"n_classes", spec.model.n_classes},
                 {"w", spec.model.w},
                 {"discrete_as_categorical", spec.model.discrete_as_categorical}};
  js["k_c_grid"] = spec.k_c_grid;
  js["n_grid"] = spec.n_grid;
  js["repetitions"] = spec.repetitions;
  js["permutations"] = spec.permutations;
  js["k_perm"] = spec.k_perm;
  js["alpha"] = spec.alpha;
  js["master_seed"] = spec.master_seed;
  return js;
}

}  // namespace

SweepFiles write_cmi_sweep(const CmiSweepResult& result, const std::string& dir,
                           const std::string& tag) {
  const SweepFiles files = open_sweep_files(dir, result.spec.name, tag);

  std::ofstream csv(files.csv);
  if (!csv) throw DataError("cannot write '" + files.csv + "'");
  csv << "estimator,heuristic,k_c,n,preprocessing,rep,seed,status,"
         "estimate,truth,abs_error,runtime_s\n";
  for (const CmiSweepRow& row : result.rows) {
    const SweepCell& cell = result.cells[row.cell];
    std::string line;
    line += estimator_name(cell.estimator);
    line += ',';
    line += k_heuristic_name(cell.heuristic);
    line += ',';
    append_double(line, cell.k_c);
    line += ',' + std::to_string(cell.n) + ',';
    line += preprocessing_name(cell.prep);
    line += ',' + std::to_string(row.rep) + ',' + std::to_string(row.seed);
    if (row.ok) {
      line += ",ok,";
      append_double(line, row.estimate);
      line += ',';
      append_double(line, row.truth);
      line += ',';
      append_double(line, std::fabs(row.estimate - row.truth));
      line += ',';
      append_double(line, row.runtime_s);
    } else {
      line += ",error:" + csv_escape(row.error) + ",,,,";
    }
    csv << line << '\n';
  }

  nlohmann::json doc;
  doc["spec"] = spec_json(result.spec);
  doc["cells"] = nlohmann::json::array();
  for (const CmiCellSummary& s : result.summaries) {
    nlohmann::json jc = cell_json(s.cell);
    jc["n_ok"] = s.n_ok;
    jc["n_failed"] = s.n_failed;
    jc["mean"] = s.mean;
    if (s.variance)
      jc["variance"] = *s.variance;
    else
      jc["variance"] = nullptr;
    jc["mae"] = s.mae;
    jc["mean_runtime_s"] = s.mean_runtime_s;
    doc["cells"].push_back(std::move(jc));
  }
  std::ofstream json_out(files.json);
  if (!json_out) throw DataError("cannot write '" + files.json + "'");
  json_out << doc.dump(2) << '\n';
  return files;
}

SweepFiles write_cit_sweep(const CitSweepResult& result, const std::string& dir,
                           const std::string& tag) {
  const SweepFiles files = open_sweep_files(dir, result.spec.name, tag);

  std::ofstream csv(files.csv);
  if (!csv) throw DataError("cannot write '" + files.csv + "'");
  csv << "estimator,heuristic,k_c,n,preprocessing,rep,arm,seed,status,"
         "t_obs,p_value,reject,runtime_s\n";
  for (const CitSweepRow& row : result.rows) {
    const SweepCell& cell = result.cells[row.cell];
    std::string line;
    line += estimator_name(cell.estimator);
    line += ',';
    line += k_heuristic_name(cell.heuristic);
    line += ',';
    append_double(line, cell.k_c);
    line += ',' + std::to_string(cell.n) + ',';
    line += preprocessing_name(cell.prep);
    line += ',' + std::to_string(row.rep) + ',';
    line += row.alternative ? "alt" : "null";
    line += ',' + std::to_string(row.seed);
    if (row.ok) {
      line += ",ok,";
      append_double(line, row.t_obs);
      line += ',';
      append_double(line, row.p_value);
      line += ',';
      line += row.reject ? '1' : '0';
      line += ',';
      append_double(line, row.runtime_s);
    } else {
      line += ",error:" + csv_escape(row.error) + ",,,,";
    }
    csv << line << '\n';
  }

  nlohmann::json doc;
  doc["spec"] = spec_json(result.spec);
  doc["cells"] = nlohmann::json::array();
  for (const RateReport& r : result.reports) {
    nlohmann::json jc = cell_json(r.cell);
    jc["n_null"] = r.n_null;
    jc["fp_count"] = r.fp_count;
    jc["fpr"] = r.fpr;
    jc["fpr_ci"] = {r.fpr_ci_low, r.fpr_ci_high};
    jc["n_alt"] = r.n_alt;
    if (r.n_alt > 0) {
      jc["tp_count"] = r.tp_count;
      jc["tpr"] = r.tpr;
      jc["tpr_ci"] = {r.tpr_ci_low, r.tpr_ci_high};
    } else {
      jc["tp_count"] = nullptr;
      jc["tpr"] = nullptr;
      jc["tpr_ci"] = nullptr;
    }
    jc["mean_runtime_s"] = r.mean_runtime_s;
    doc["cells"].push_back(std::move(jc));
  }
  std::ofstream json_out(files.json);
  if (!json_out) throw DataError("cannot write '" + files.json + "'");
  json_out << doc.dump(2) << '\n';
  return files;
}

}  // namespace mixcit
