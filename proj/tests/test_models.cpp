#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mixcit/errors.hpp"
#include "mixcit/models.hpp"
#include "oracles.hpp"

using namespace mixcit;

namespace {

ModelSpec make_spec(ModelFamily family, std::size_t n, std::uint64_t seed) {
  ModelSpec spec;
  spec.family = family;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

std::vector<double> column_values(const GeneratedSample& s, std::size_t c) {
  return s.dataset.column(c).values;
}

void check_mean_within(const std::vector<double>& v, double mu, double sigma) {
  // four standard errors of the sample mean
  const double se = sigma / std::sqrt(static_cast<double>(v.size()));
  CHECK(std::fabs(oracles::mean(v) - mu) < 4.0 * se);
}

}  // namespace

TEST_CASE("seed determinism and seed sensitivity") {
  for (ModelFamily family :
       {ModelFamily::IndepZEst, ModelFamily::ChainStructEst,
        ModelFamily::ConfGaussEst, ModelFamily::ConfUnifEst,
        ModelFamily::MixtureEst, ModelFamily::ConfounderCit,
        ModelFamily::IndepZCit, ModelFamily::ClusterConfCit,
        ModelFamily::ChainCit}) {
    ModelSpec spec = make_spec(family, 100, 31);
    spec.w = 0.5;
    const GeneratedSample a = generate(spec);
    const GeneratedSample b = generate(spec);
    for (std::size_t c = 0; c < a.dataset.n_cols(); ++c)
      CHECK(a.dataset.column(c).values == b.dataset.column(c).values);

    spec.seed = 32;
    const GeneratedSample other = generate(spec);
    CHECK(other.dataset.column(0).values != a.dataset.column(0).values);
  }
}

TEST_CASE("ground truths") {
  ModelSpec indep = make_spec(ModelFamily::IndepZEst, 10, 0);
  indep.c = 5;
  CHECK(*ground_truth(indep) ==
        doctest::Approx(1.0549201679861442).epsilon(1e-12));
  indep.c = 1;
  CHECK(*ground_truth(indep) == doctest::Approx(0.0));

  CHECK(*ground_truth(make_spec(ModelFamily::ChainStructEst, 10, 0)) == 0.0);
  CHECK(*ground_truth(make_spec(ModelFamily::ConfGaussEst, 10, 0)) == 0.0);
  CHECK(*ground_truth(make_spec(ModelFamily::ConfUnifEst, 10, 0)) == 0.0);

  // 0.35 * (-ln 0.64) + 0.3 * (ln 5 - 0.8 ln 2)
  ModelSpec mix = make_spec(ModelFamily::MixtureEst, 10, 0);
  CHECK(*ground_truth(mix) == doctest::Approx(0.4726765363157901).epsilon(1e-9));

  CHECK(!ground_truth(make_spec(ModelFamily::IndepZCit, 10, 0)).has_value());
}

TEST_CASE("h0 flags for cit families") {
  for (ModelFamily family : {ModelFamily::ConfounderCit, ModelFamily::IndepZCit,
                             ModelFamily::ClusterConfCit, ModelFamily::ChainCit}) {
    ModelSpec spec = make_spec(family, 50, 77);
    spec.w = 0.0;
    CHECK(*generate(spec).h0_holds);
    spec.w = 0.5;
    CHECK(!*generate(spec).h0_holds);
    CHECK(!generate(spec).truth.has_value());
  }
}

TEST_CASE("schemas match the models") {
  ModelSpec indep = make_spec(ModelFamily::IndepZEst, 40, 5);
  indep.d = 2;
  const GeneratedSample s = generate(indep);
  CHECK(s.dataset.n_cols() == 4);
  CHECK(s.dataset.column(0).kind == ColumnKind::Categorical);  // X
  CHECK(s.dataset.column(1).kind == ColumnKind::Continuous);   // Y
  CHECK(s.dataset.column(2).kind == ColumnKind::Categorical);  // Z1
  CHECK(s.partition.x_cols == std::vector<std::size_t>{0});
  CHECK(s.partition.y_cols == std::vector<std::size_t>{1});
  CHECK(s.partition.z_cols == std::vector<std::size_t>({2, 3}));

  ModelSpec indep_dn = indep;
  indep_dn.discrete_as_categorical = false;
  CHECK(generate(indep_dn).dataset.column(0).kind == ColumnKind::DiscreteNumeric);

  const GeneratedSample chain =
      generate(make_spec(ModelFamily::ChainStructEst, 40, 5));
  CHECK(chain.dataset.column(0).kind == ColumnKind::Continuous);       // X
  CHECK(chain.dataset.column(1).kind == ColumnKind::DiscreteNumeric);  // Y
  CHECK(chain.dataset.column(2).kind == ColumnKind::DiscreteNumeric);  // Z1 (Poisson)

  ModelSpec conf = make_spec(ModelFamily::ConfounderCit, 40, 5);
  conf.dim_d = 2;
  conf.dim_c = 1;
  const GeneratedSample cs = generate(conf);
  CHECK(cs.dataset.n_cols() == 5);
  CHECK(cs.dataset.column(2).kind == ColumnKind::Categorical);
  CHECK(cs.dataset.column(3).kind == ColumnKind::Categorical);
  CHECK(cs.dataset.column(4).kind == ColumnKind::Continuous);

  // chain-cit z stays inside {0 .. n_classes-2} (the mod keeps n_c-1 classes)
  ModelSpec chain_cit = make_spec(ModelFamily::ChainCit, 500, 5);
  chain_cit.n_classes = 4;
  const GeneratedSample cc = generate(chain_cit);
  for (double z : column_values(cc, 2)) {
    CHECK(z >= 0.0);
    CHECK(z <= 2.0);
  }
}

TEST_CASE("marginal sanity at n = 10000") {
  const std::size_t n = 10000;

  ModelSpec indep = make_spec(ModelFamily::IndepZEst, n, 91);
  indep.c = 5;
  const GeneratedSample s = generate(indep);
  // X uniform over {0..4}: mean 2, var 2
  check_mean_within(column_values(s, 0), 2.0, std::sqrt(2.0));
  // Y = X + U[0,2]: mean 3, var 2 + 1/3
  check_mean_within(column_values(s, 1), 3.0, std::sqrt(2.0 + 1.0 / 3.0));
  // Z ~ Ber(0.5)
  check_mean_within(column_values(s, 2), 0.5, 0.5);

  const GeneratedSample chain =
      generate(make_spec(ModelFamily::ChainStructEst, n, 92));
  // X ~ Exp(mean 10); Z1 | X ~ Poisson(X) so E Z1 = 10, Var Z1 = 10 + 100
  check_mean_within(column_values(chain, 0), 10.0, 10.0);
  check_mean_within(column_values(chain, 2), 10.0, std::sqrt(110.0));
  // Y | Z1 ~ Bin(Z1, 0.5): mean 5
  check_mean_within(column_values(chain, 1), 5.0, std::sqrt(30.0));

  ModelSpec confg = make_spec(ModelFamily::ConfGaussEst, n, 93);
  confg.m = 9;
  const GeneratedSample cg = generate(confg);
  // Z uniform {0..9}: mean 4.5, var 8.25; X = Z + N(0,1)
  check_mean_within(column_values(cg, 2), 4.5, std::sqrt(8.25));
  check_mean_within(column_values(cg, 0), 4.5, std::sqrt(9.25));

  ModelSpec mix = make_spec(ModelFamily::MixtureEst, n, 94);
  const GeneratedSample mx = generate(mix);
  // branch indicator ~ Ber(0.3)
  check_mean_within(column_values(mx, 2), 0.3, std::sqrt(0.21));
  // X: 0.7 * N(0,1) + 0.3 * U{0..4} -> mean 0.6
  const double mix_var = 0.7 * 1.0 + 0.3 * 2.0 + 0.7 * 0.36 + 0.3 * 1.96;
  check_mean_within(column_values(mx, 0), 0.6, std::sqrt(mix_var));

  ModelSpec iz = make_spec(ModelFamily::IndepZCit, n, 95);
  iz.dim_d = 2;
  iz.n_classes = 3;
  iz.w = 0.0;
  const GeneratedSample izs = generate(iz);
  // Z ~ Bin(2, 0.5): mean 1, var 0.5
  check_mean_within(column_values(izs, 2), 1.0, std::sqrt(0.5));
  check_mean_within(column_values(izs, 0), 0.0, 1.0);
}

TEST_CASE("cluster-dependent confounder couples only the z = 0 cluster") {
  ModelSpec spec = make_spec(ModelFamily::ClusterConfCit, 20000, 96);
  spec.n_classes = 3;
  spec.w = 0.75;
  const GeneratedSample s = generate(spec);

  std::vector<double> x0, y0, x1, y1;
  for (std::size_t i = 0; i < s.dataset.n_rows(); ++i) {
    if (s.dataset.column(2).values[i] == 0.0) {
      x0.push_back(s.dataset.column(0).values[i]);
      y0.push_back(s.dataset.column(1).values[i]);
    } else {
      x1.push_back(s.dataset.column(0).values[i]);
      y1.push_back(s.dataset.column(1).values[i]);
    }
  }
  // w = 0.75 inside z = 0: corr = 0.5625 / 1.5625 = 0.36
  CHECK(oracles::correlation(x0, y0) > 0.15);
  CHECK(std::fabs(oracles::correlation(x1, y1)) <
        4.0 / std::sqrt(static_cast<double>(x1.size())));
}

TEST_CASE("null and alternative arms share everything but the coupling") {
  ModelSpec null_spec = make_spec(ModelFamily::IndepZCit, 500, 97);
  null_spec.w = 0.0;
  ModelSpec alt_spec = null_spec;
  alt_spec.w = 0.7;
  const GeneratedSample a = generate(null_spec);
  const GeneratedSample b = generate(alt_spec);
  // identical Z draws
  CHECK(a.dataset.column(2).values == b.dataset.column(2).values);
  // X differs only through the added shared noise
  bool all_differ = true;
  for (std::size_t i = 0; i < 500; ++i)
    if (a.dataset.column(0).values[i] == b.dataset.column(0).values[i])
      all_differ = false;
  CHECK(all_differ);
}

TEST_CASE("config validation") {
  ModelSpec spec = make_spec(ModelFamily::IndepZEst, 0, 1);
  CHECK_THROWS_AS(generate(spec), ConfigError);
  spec.n = 10;
  spec.c = 0;
  CHECK_THROWS_AS(generate(spec), ConfigError);

  ModelSpec mix = make_spec(ModelFamily::MixtureEst, 10, 1);
  mix.p = 0.0;
  CHECK_THROWS_AS(generate(mix), ConfigError);

  ModelSpec cit = make_spec(ModelFamily::IndepZCit, 10, 1);
  cit.n_classes = 1;
  CHECK_THROWS_AS(generate(cit), ConfigError);

  CHECK_THROWS_AS(model_family_from_name("nope"), ConfigError);
  CHECK(model_family_from_name("indepz-est") == ModelFamily::IndepZEst);
  CHECK(model_family_name(ModelFamily::ChainCit) == "chain-cit");
}

TEST_CASE("confunif: the z = 0 cluster is degenerate at x = 0 by construction") {
  const GeneratedSample s = generate(make_spec(ModelFamily::ConfUnifEst, 400, 98));
  for (std::size_t i = 0; i < s.dataset.n_rows(); ++i) {
    const double z = s.dataset.column(2).values[i];
    const double x = s.dataset.column(0).values[i];
    const double y = s.dataset.column(1).values[i];
    if (z == 0.0) CHECK(x == 0.0);
    CHECK(y >= z);
    CHECK(y <= z + 1.0);
  }
}

TEST_CASE("write_generated emits csv and sidecar") {
  ModelSpec spec = make_spec(ModelFamily::IndepZEst, 25, 99);
  spec.c = 5;
  const GeneratedSample s = generate(spec);
  write_generated(s, spec, "models_out.csv");

  std::ifstream csv("models_out.csv");
  CHECK(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "X,Y,Z1");

  std::ifstream meta("models_out.csv.meta.json");
  std::string text((std::istreambuf_iterator<char>(meta)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"truth\": 1.05492") != std::string::npos);
  CHECK(text.find("\"model\": \"indepz-est\"") != std::string::npos);
  CHECK(text.find("\"partition\"") != std::string::npos);

  std::remove("models_out.csv");
  std::remove("models_out.csv.meta.json");
}
