#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixcit/bench.hpp"
#include "mixcit/errors.hpp"
#include "mixcit/random.hpp"
#include "oracles.hpp"

using namespace mixcit;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Wall-clock fields measure the machine, not the estimate; byte-for-byte
// reproducibility applies to everything else.
std::string strip_runtimes(const std::string& text) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.find("runtime") != std::string::npos) {
      const bool csv_row = line.find(',') != std::string::npos &&
                           line.find(':') == std::string::npos;
      if (!csv_row) continue;  // JSON runtime entry: drop the line
    }
    if (line.find(',') != std::string::npos && line.find('{') == std::string::npos &&
        line.find(':') == std::string::npos && line.find('[') == std::string::npos) {
      // CSV row: drop the trailing runtime column
      out += line.substr(0, line.rfind(','));
    } else {
      out += line;
    }
    out += '\n';
  }
  return out;
}

std::string stable_bytes(const std::string& path) { return strip_runtimes(slurp(path)); }

SweepSpec tiny_cmi_spec() {
  SweepSpec spec;
  spec.name = "tiny";
  spec.model.family = ModelFamily::IndepZEst;
  spec.model.c = 5;
  spec.model.d = 1;
  EstimatorConfig est;
  est.kind = EstimatorKind::MSInf;
  spec.estimators = {est};
  spec.k_c_grid = {0.2};
  spec.n_grid = {120};
  spec.preprocessing = {Preprocessing::None};
  spec.repetitions = 3;
  spec.master_seed = 400;
  return spec;
}

}  // namespace

TEST_CASE("binomial ci boundary conventions") {
  CHECK(binomial_ci(0, 100, 0.05).first == 0.0);
  CHECK(binomial_ci(100, 100, 0.05).second == 1.0);
  CHECK_THROWS_AS(binomial_ci(-1, 100, 0.05), ConfigError);
  CHECK_THROWS_AS(binomial_ci(5, 0, 0.05), ConfigError);
  CHECK_THROWS_AS(binomial_ci(5, 100, 0.0), ConfigError);
}

TEST_CASE("binomial ci against the scan oracle") {
  for (auto [s, n] : {std::pair{5, 100}, {1, 30}, {15, 40}, {99, 100}}) {
    const auto [lo, hi] = binomial_ci(s, n, 0.05);
    const auto [olo, ohi] = oracles::clopper_pearson_scan(s, n, 0.05);
    CHECK(std::fabs(lo - olo) < 2e-6);
    CHECK(std::fabs(hi - ohi) < 2e-6);
  }
  // reference value: 95% bounds for 5 successes in 100 trials
  const auto [lo, hi] = binomial_ci(5, 100, 0.05);
  CHECK(lo == doctest::Approx(0.016435).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.112835).epsilon(1e-3));
}

TEST_CASE("binomial ci bounds are monotone in the success count") {
  double prev_lo = -1.0, prev_hi = -1.0;
  for (int s = 0; s <= 60; ++s) {
    const auto [lo, hi] = binomial_ci(s, 60, 0.05);
    CHECK(lo >= prev_lo);
    CHECK(hi >= prev_hi);
    CHECK(lo <= static_cast<double>(s) / 60.0);
    CHECK(hi >= static_cast<double>(s) / 60.0);
    prev_lo = lo;
    prev_hi = hi;
  }
}

TEST_CASE("binomial ci coverage at p = 0.05, n = 100") {
  Rng rng(4001);
  const int draws = 1000;
  int covered = 0;
  for (int d = 0; d < draws; ++d) {
    const int successes = rng.binomial(100, 0.05);
    const auto [lo, hi] = binomial_ci(successes, 100, 0.05);
    if (lo <= 0.05 && 0.05 <= hi) ++covered;
  }
  CHECK(static_cast<double>(covered) / draws >= 0.93);
}

TEST_CASE("cmi sweep: shape, truth, determinism of written bytes") {
  const SweepSpec spec = tiny_cmi_spec();
  const CmiSweepResult result = run_cmi_sweep(spec);
  CHECK(result.cells.size() == 1);
  CHECK(result.rows.size() == 3);
  for (const CmiSweepRow& row : result.rows) {
    CHECK(row.ok);
    CHECK(row.truth == doctest::Approx(1.0549201679861442));
    CHECK(std::isfinite(row.estimate));
  }
  CHECK(result.summaries[0].n_ok == 3);
  CHECK(result.summaries[0].variance.has_value());

  const SweepFiles f1 = write_cmi_sweep(result, "bench_t1", "tag");
  const SweepFiles f2 = write_cmi_sweep(run_cmi_sweep(spec), "bench_t2", "tag");
  CHECK(stable_bytes(f1.csv) == stable_bytes(f2.csv));
  CHECK(stable_bytes(f1.json) == stable_bytes(f2.json));
  CHECK(f1.csv.find("tiny_tag.csv") != std::string::npos);
  for (const auto& p : {f1.csv, f1.json, f2.csv, f2.json}) std::remove(p.c_str());
}

TEST_CASE("cmi sweep: single repetition reports no variance") {
  SweepSpec spec = tiny_cmi_spec();
  spec.repetitions = 1;
  const CmiSweepResult result = run_cmi_sweep(spec);
  CHECK(!result.summaries[0].variance.has_value());
  const SweepFiles files = write_cmi_sweep(result, "bench_t3", "tag");
  CHECK(slurp(files.json).find("\"variance\": null") != std::string::npos);
  std::remove(files.csv.c_str());
  std::remove(files.json.c_str());
  std::remove("bench_t3");
}

TEST_CASE("cmi sweep rejects cit families and empty grids") {
  SweepSpec spec = tiny_cmi_spec();
  spec.model.family = ModelFamily::IndepZCit;
  CHECK_THROWS_AS(run_cmi_sweep(spec), ConfigError);
  SweepSpec empty = tiny_cmi_spec();
  empty.k_c_grid.clear();
  CHECK_THROWS_AS(run_cmi_sweep(empty), ConfigError);
}

TEST_CASE("cit sweep: paired arms, rates, and w = 0 null-only mode") {
  SweepSpec spec;
  spec.name = "tiny_cit";
  spec.model.family = ModelFamily::IndepZCit;
  spec.model.dim_d = 1;
  spec.model.n_classes = 3;
  spec.model.w = 0.8;
  EstimatorConfig est;
  est.kind = EstimatorKind::MSInf;
  spec.estimators = {est};
  spec.k_c_grid = {0.2};
  spec.n_grid = {100};
  spec.preprocessing = {Preprocessing::Standardize};
  spec.repetitions = 6;
  spec.permutations = 19;
  spec.k_perm = 5;
  spec.alpha = 0.05;
  spec.master_seed = 77;

  const CitSweepResult result = run_cit_sweep(spec);
  CHECK(result.rows.size() == 12);  // 6 reps x 2 arms
  const RateReport& report = result.reports[0];
  CHECK(report.n_null == 6);
  CHECK(report.n_alt == 6);
  CHECK(report.fpr_ci_low <= report.fpr);
  CHECK(report.fpr <= report.fpr_ci_high);
  CHECK(report.tpr_ci_high <= 1.0);

  // null and alternative rows of the same rep share the data seed
  for (int rep = 0; rep < 6; ++rep) {
    const CitSweepRow& a = result.rows[2 * rep];
    const CitSweepRow& b = result.rows[2 * rep + 1];
    CHECK(a.rep == b.rep);
    CHECK(a.alternative != b.alternative);
    CHECK(a.seed == b.seed);
  }

  SweepSpec null_only = spec;
  null_only.model.w = 0.0;
  const CitSweepResult nr = run_cit_sweep(null_only);
  CHECK(nr.rows.size() == 6);
  CHECK(nr.reports[0].n_alt == 0);
  const SweepFiles files = write_cit_sweep(nr, "bench_t4", "tag");
  CHECK(slurp(files.json).find("\"tpr\": null") != std::string::npos);
  std::remove(files.csv.c_str());
  std::remove(files.json.c_str());
}

TEST_CASE("cit sweep bytes are deterministic") {
  SweepSpec spec;
  spec.name = "det_cit";
  spec.model.family = ModelFamily::IndepZCit;
  spec.model.w = 0.0;
  EstimatorConfig est;
  est.kind = EstimatorKind::MSInf;
  spec.estimators = {est};
  spec.k_c_grid = {0.2};
  spec.n_grid = {80};
  spec.repetitions = 3;
  spec.permutations = 9;
  spec.master_seed = 5150;

  const SweepFiles f1 = write_cit_sweep(run_cit_sweep(spec), "bench_t5", "tag");
  const SweepFiles f2 = write_cit_sweep(run_cit_sweep(spec), "bench_t6", "tag");
  CHECK(stable_bytes(f1.csv) == stable_bytes(f2.csv));
  CHECK(stable_bytes(f1.json) == stable_bytes(f2.json));
  for (const auto& p : {f1.csv, f1.json, f2.csv, f2.json}) std::remove(p.c_str());
}

TEST_CASE("sweep spec json round trip") {
  const char* text = R"({
    "name": "demo",
    "model": {"family": "indepz-cit", "dim_d": 2, "n_classes": 4, "w": 0.5},
    "estimators": [{"kind": "msinf", "heuristic": "global"}, {"kind": "ms"}],
    "k_c_grid": [0.1, 0.2],
    "n_grid": [100, 200],
    "preprocessing": ["std", "rank"],
    "repetitions": 7,
    "permutations": 33,
    "k_perm": 4,
    "alpha": 0.1,
    "master_seed": 99
  })";
  std::ofstream out("bench_spec.json");
  out << text;
  out.close();
  const SweepSpec spec = sweep_spec_from_json_file("bench_spec.json");
  CHECK(spec.name == "demo");
  CHECK(spec.model.family == ModelFamily::IndepZCit);
  CHECK(spec.model.dim_d == 2);
  CHECK(spec.model.n_classes == 4);
  CHECK(spec.estimators.size() == 2);
  CHECK(spec.estimators[0].heuristic == KHeuristicKind::Global);
  CHECK(spec.k_c_grid.size() == 2);
  CHECK(spec.n_grid.size() == 2);
  CHECK(spec.preprocessing.size() == 2);
  CHECK(spec.repetitions == 7);
  CHECK(spec.permutations == 33);
  CHECK(spec.k_perm == 4);
  CHECK(spec.alpha == 0.1);
  CHECK(spec.master_seed == 99);
  std::remove("bench_spec.json");

  CHECK_THROWS_AS(sweep_spec_from_json_file("no_such_file.json"), DataError);
}

TEST_CASE("cmi sweep reproduces the independent-Z bias ordering") {
  // at small k_c all estimators track the truth; at k_c = 0.2 the one-hot
  // metric drags MS toward zero while the cluster-restricted variant holds
  SweepSpec spec;
  spec.name = "ordering";
  spec.model.family = ModelFamily::IndepZEst;
  spec.model.c = 5;
  spec.model.d = 1;
  EstimatorConfig ms, msinf;
  ms.kind = EstimatorKind::MS;
  msinf.kind = EstimatorKind::MSInf;
  spec.estimators = {ms, msinf};
  spec.k_c_grid = {0.01, 0.2};
  spec.n_grid = {600};
  spec.repetitions = 10;
  spec.master_seed = 606;

  const CmiSweepResult result = run_cmi_sweep(spec);
  const double truth = 1.0549201679861442;
  auto cell_mean = [&](EstimatorKind kind, double k_c) {
    for (const CmiCellSummary& s : result.summaries)
      if (s.cell.estimator == kind && s.cell.k_c == k_c) return s.mean;
    REQUIRE(false);
    return 0.0;
  };
  CHECK(std::fabs(cell_mean(EstimatorKind::MS, 0.01) - truth) < 0.15);
  CHECK(std::fabs(cell_mean(EstimatorKind::MSInf, 0.01) - truth) < 0.15);
  CHECK(std::fabs(cell_mean(EstimatorKind::MSInf, 0.2) - truth) < 0.15);
  CHECK(cell_mean(EstimatorKind::MS, 0.2) < 0.3 * truth);
}

TEST_CASE("estimator failures are recorded, not fatal") {
  // confunif makes ZMADG hit its degenerate-geometry error (X constant in
  // the z = 0 cluster)
  SweepSpec spec;
  spec.name = "failing";
  spec.model.family = ModelFamily::ConfUnifEst;
  EstimatorConfig est;
  est.kind = EstimatorKind::ZMADG;
  spec.estimators = {est};
  spec.k_c_grid = {0.1};
  spec.n_grid = {60};
  spec.repetitions = 2;
  spec.master_seed = 12;
  const CmiSweepResult result = run_cmi_sweep(spec);
  CHECK(result.summaries[0].n_failed == 2);
  for (const CmiSweepRow& row : result.rows) {
    CHECK(!row.ok);
    CHECK(!row.error.empty());
  }
}
