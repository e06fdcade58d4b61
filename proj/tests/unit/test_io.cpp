#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "robust_smix/baseline.hpp"
#include "robust_smix/config.hpp"
#include "robust_smix/csv.hpp"
#include "robust_smix/engine.hpp"
#include "robust_smix/errors.hpp"
#include "robust_smix/evaluate.hpp"
#include "robust_smix/persistence.hpp"
#include "robust_smix/synthetic.hpp"

using namespace robust_smix;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("robust_smix_" + name)).string();
}

MaskedDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

}  // namespace

TEST_CASE("csv parsing") {
  const MaskedDataset a = parse("a,b\n1.0,2.0\n");
  CHECK(a.rows() == 1);
  CHECK(a.dim() == 2);
  CHECK_FALSE(a.has_missing());
  CHECK(a.names() == std::vector<std::string>{"a", "b"});

  const MaskedDataset b = parse("a,b\n1.0,\n");
  CHECK_FALSE(b.observed(0, 1));
  CHECK(b.observed(0, 0));

  const MaskedDataset c = parse("a,b\r\nNA,3\r\n-2.5e1,NaN\r\n");
  CHECK_FALSE(c.observed(0, 0));
  CHECK_FALSE(c.observed(1, 1));
  CHECK(c.value(1, 0) == -25.0);
}

TEST_CASE("csv errors carry positions") {
  try {
    parse("a,b\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse("a,b\n1,2\n3,abc\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("csv round trip") {
  SyntheticSpec spec;
  spec.J = 1000;
  spec.d = 3;
  spec.missing_fraction = 0.2;
  spec.seed = 17;
  const SyntheticData s = generate(spec);
  const std::string path = temp_path("roundtrip.csv");
  save_csv(path, s.data);
  const MaskedDataset back = load_csv(path);
  CHECK(back.mask() == s.data.mask());
  CHECK(back.names() == s.data.names());
  for (Eigen::Index j = 0; j < back.rows(); ++j)
    for (Eigen::Index i = 0; i < back.dim(); ++i)
      if (back.observed(j, i)) CHECK(back.value(j, i) == s.data.value(j, i));
  std::filesystem::remove(path);
}

TEST_CASE("run config") {
  std::istringstream in(
      "# comment\nmax_iterations = 40\nmodel_kind = gaussian\nseed=12\n\nmarginal_mode = paper_literal\n"
      "scatter_mode = normalized\nthreads = 2\nkappa0 = 0.5\nr0 = 3\n");
  const RunConfig rc = parse_run_config(in);
  CHECK(rc.fit.max_iterations == 40);
  CHECK(rc.fit.model_kind == ModelKind::gaussian);
  CHECK(rc.fit.seed == 12);
  CHECK(rc.fit.marginal_mode == MarginalMode::paper_literal);
  CHECK(rc.fit.scatter_mode == ScatterMode::normalized);
  CHECK(rc.fit.threads == 2);
  PriorSpec p;
  rc.priors.apply(p);
  CHECK(p.kappa0 == 0.5);
  CHECK(p.r0 == 3.0);
  CHECK(p.q0 == 1.0);

  std::istringstream dup("seed = 1\nseed = 2\n");
  CHECK_THROWS_AS(parse_run_config(dup), ParseError);
  std::istringstream unknown("colour = red\n");
  CHECK_THROWS(parse_run_config(unknown));
  std::istringstream noeq("seed 1\n");
  CHECK_THROWS_AS(parse_run_config(noeq), ParseError);
  std::istringstream badnum("max_iterations = ten\n");
  CHECK_THROWS(parse_run_config(badnum));
}

TEST_CASE("model persistence round trip") {
  SyntheticSpec spec;
  spec.J = 120;
  spec.missing_fraction = 0.1;
  spec.outlier_fraction = 0.05;
  spec.seed = 5;
  const SyntheticData s = generate(spec);
  const FitResult f = fit(s.data, default_priors(s.data, 3), FitConfig{});
  const std::string text = serialize_model(f);
  const FitResult g = deserialize_model(text);
  CHECK(serialize_model(g) == text);
  REQUIRE(g.clusters.size() == f.clusters.size());
  for (std::size_t k = 0; k < f.clusters.size(); ++k) {
    CHECK(g.clusters[k].mu == f.clusters[k].mu);
    CHECK(g.clusters[k].Sigma.matrix() == f.clusters[k].Sigma.matrix());
    CHECK(g.clusters[k].kappa == f.clusters[k].kappa);
    CHECK(g.clusters[k].log_p == f.clusters[k].log_p);
    CHECK(g.clusters[k].e_log_beta == f.clusters[k].e_log_beta);
    CHECK(g.clusters[k].active == f.clusters[k].active);
  }
  CHECK(g.elbo_trace.size() == f.elbo_trace.size());
  CHECK(g.elbo_trace.back().elbo == f.elbo_trace.back().elbo);
  CHECK(g.converged == f.converged);
  CHECK(g.priors.Sigma0 == f.priors.Sigma0);
  CHECK(g.config.seed == f.config.seed);
  CHECK(predict(g, s.data).responsibilities == predict(f, s.data).responsibilities);

  const std::string path = temp_path("model.json");
  save_model(path, f);
  CHECK(serialize_model(load_model(path)) == text);
  std::filesystem::remove(path);
  CHECK_THROWS(deserialize_model("{\"format\": \"something-else\"}"));
  CHECK_THROWS(deserialize_model("not json"));
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.J = 200;
  spec.seed = 3;
  const SyntheticData a = generate(spec);
  const SyntheticData b = generate(spec);
  CHECK(a.truth == b.truth);
  CHECK(a.labels == b.labels);
  CHECK_FALSE(a.data.has_missing());
  CHECK(std::count(a.labels.begin(), a.labels.end(), -1) == 0);

  spec.missing_fraction = 0.3;
  spec.outlier_fraction = 0.1;
  spec.d = 3;
  const SyntheticData c = generate(spec);
  CHECK(std::count(c.labels.begin(), c.labels.end(), -1) == 20);
  for (Eigen::Index j = 0; j < c.data.rows(); ++j) CHECK(c.data.observed_count(j) >= 1);
  const double frac = 1.0 - static_cast<double>(c.data.mask().count()) / c.data.mask().size();
  CHECK(frac == doctest::Approx(0.3).epsilon(0.25));

  SyntheticSpec bad;
  bad.d = 2;
  bad.missing_fraction = 0.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad.d = 1;
  bad.missing_fraction = 0.1;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  // Well-separated pair: k-means alone recovers it.
  SyntheticSpec two;
  two.K = 2;
  two.separation = 10.0;
  two.seed = 8;
  const SyntheticData t = generate(two);
  const std::vector<int> km = kmeans(t.data.values(), 2, 0);
  CHECK(adjusted_rand_index(km, t.labels) >= 0.99);

  std::istringstream in("J = 50\nd = 4\nK = 2\nseparation = 3.5\ncorrelation = 0.2\nseed = 9\n");
  const SyntheticSpec parsed = parse_synthetic_spec(in);
  CHECK(parsed.J == 50);
  CHECK(parsed.d == 4);
  CHECK(parsed.separation == 3.5);
  CHECK(parsed.correlation == 0.2);
}

TEST_CASE("truth file round trip") {
  SyntheticSpec spec;
  spec.J = 40;
  spec.missing_fraction = 0.2;
  spec.outlier_fraction = 0.1;
  const SyntheticData s = generate(spec);
  const std::string path = temp_path("truth.csv");
  save_truth(path, s);
  const Truth t = load_truth(path);
  CHECK(t.labels == s.labels);
  CHECK(t.values == s.truth);
  CHECK(t.missing == s.data.mask().unaryExpr([](bool b) { return !b; }).eval());
  std::filesystem::remove(path);
}

TEST_CASE("GMM-EM baseline") {
  SyntheticSpec one;
  one.K = 1;
  one.J = 300;
  one.seed = 2;
  const SyntheticData s1 = generate(one);
  const GmmEmResult g1 = gmm_em_baseline(s1.data, 1, 0);
  const Matrix& x = s1.data.values();
  const Vector mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - mean.transpose();
  CHECK((g1.means[0] - mean).norm() < 1e-6);
  CHECK((g1.covariances[0] - centered.transpose() * centered / 300.0).norm() < 1e-6);

  SyntheticSpec two;
  two.K = 2;
  two.separation = 10.0;
  two.seed = 4;
  const SyntheticData s2 = generate(two);
  const GmmEmResult g2 = gmm_em_baseline(s2.data, 2, 1);
  CHECK(adjusted_rand_index(g2.labels, s2.labels) >= 0.99);

  SyntheticSpec three;
  three.missing_fraction = 0.1;
  three.outlier_fraction = 0.05;
  three.seed = 6;
  const SyntheticData s3 = generate(three);
  CHECK_THROWS(gmm_em_baseline(s3.data, 3, 0));
  const GmmEmResult g3 = gmm_em_baseline(s3.data, 3, 0, 200, true);
  for (std::size_t i = 1; i < g3.loglik_trace.size(); ++i)
    CHECK(g3.loglik_trace[i] >= g3.loglik_trace[i - 1] - 1e-9 * std::abs(g3.loglik_trace[i]));
  CHECK(gmm_em_baseline(s3.data, 3, 0, 200, true).labels == g3.labels);
}
