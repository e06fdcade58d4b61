#include <doctest.h>

#include <cmath>
#include <random>

#include "robust_smix/errors.hpp"
#include "robust_smix/model.hpp"

using namespace robust_smix;

TEST_CASE("masked dataset groups patterns and hides masked cells") {
  Matrix v(4, 3);
  v << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  BoolMatrix m = BoolMatrix::Constant(4, 3, true);
  m(1, 0) = false;
  m(3, 0) = false;
  m(2, 2) = false;
  const MaskedDataset data(v, m);
  CHECK(data.patterns().size() == 3);
  CHECK(data.pattern_of(1) == data.pattern_of(3));
  CHECK(data.pattern_of(0) != data.pattern_of(2));
  CHECK(std::isnan(data.values()(1, 0)));
  CHECK_THROWS_AS(data.value(2, 2), DomainError);
  CHECK(data.observed_count(1) == 2);
  CHECK(data.missing_count(2) == 1);
  CHECK(data.observed_values(1) == Eigen::Vector2d(5, 6));
  CHECK(data.has_missing());
  CHECK(data.names()[2] == "x2");

  // Masked cells may hold anything, including non-finite placeholders.
  Matrix w = v;
  w(2, 2) = std::numeric_limits<double>::infinity();
  CHECK_NOTHROW(MaskedDataset(w, m));
  w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(MaskedDataset(w, m), ConfigError);
}

TEST_CASE("fit readiness") {
  Matrix v(2, 2);
  v << 1, 2, 3, 4;
  BoolMatrix m(2, 2);
  m << true, false, true, false;
  const MaskedDataset data(v, m, {"a", "b"});
  try {
    data.require_fit_ready();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(default_priors(data, 2), ConfigError);
}

TEST_CASE("default priors") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix v(400, 2);
  for (Eigen::Index j = 0; j < v.rows(); ++j) v.row(j) << n(rng), n(rng);
  // Standardize so observed variances are one.
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double mean = v.col(i).mean();
    v.col(i).array() -= mean;
    const double sd = std::sqrt(v.col(i).squaredNorm() / (v.rows() - 1));
    v.col(i) /= sd;
  }
  const MaskedDataset data = MaskedDataset::fully_observed(v);
  const PriorSpec p = default_priors(data, 3);
  CHECK(p.K == 3);
  CHECK(p.gamma0 == 4.0);
  CHECK(p.kappa0 == 1.0);
  CHECK(p.eta0 == 0.01);
  CHECK(p.r0 == 2.0);
  CHECK((p.mu0 - v.colwise().mean().transpose()).norm() < 1e-12);
  CHECK((p.Sigma0 - Matrix::Identity(2, 2)).norm() < 1e-2);
  CHECK(p.Sigma0(0, 1) == 0.0);
}

TEST_CASE("prior validation") {
  Matrix v(3, 2);
  v << 0, 1, 2, 3, 5, 4;
  const MaskedDataset data = MaskedDataset::fully_observed(v);
  const PriorSpec p = default_priors(data, 2);
  const PriorSpec same = validate(p, data);
  CHECK(same.gamma0 == p.gamma0);
  CHECK(same.Sigma0 == p.Sigma0);
  CHECK(validate(validate(p, data), data).mu0 == p.mu0);

  PriorSpec bad = p;
  bad.gamma0 = 2.0;
  try {
    validate(bad, data);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("inverse-Wishart mean undefined") != std::string::npos);
  }

  // Indefinite scale built from an eigen-decomposition with one negative eigenvalue.
  const double c = std::cos(0.4), s = std::sin(0.4);
  Matrix q(2, 2);
  q << c, -s, s, c;
  bad = p;
  bad.Sigma0 = q * Eigen::Vector2d(2.0, -0.5).asDiagonal() * q.transpose();
  CHECK_THROWS_AS(validate(bad, data), ConfigError);

  bad = p;
  bad.q0 = 0.0;
  CHECK_THROWS_AS(validate(bad, data), ConfigError);
  bad = p;
  bad.mu0 = Vector::Zero(3);
  CHECK_THROWS_AS(validate(bad, data), ConfigError);
}

TEST_CASE("fit config validation and enum names") {
  FitConfig c;
  CHECK_NOTHROW(validate(c, 3));
  c.elbo_rel_tolerance = 0.0;
  CHECK_THROWS_AS(validate(c, 3), ConfigError);
  c = FitConfig{};
  c.min_responsibility_floor = 0.5;
  CHECK_THROWS_AS(validate(c, 2), ConfigError);
  CHECK_NOTHROW(validate(c, 1));

  CHECK(parse_init_method(to_string(InitMethod::random)) == InitMethod::random);
  CHECK(parse_marginal_mode(to_string(MarginalMode::paper_literal)) == MarginalMode::paper_literal);
  CHECK(parse_model_kind(to_string(ModelKind::gaussian)) == ModelKind::gaussian);
  CHECK(parse_scatter_mode(to_string(ScatterMode::normalized)) == ScatterMode::normalized);
  CHECK_THROWS_AS(parse_model_kind("laplace"), ConfigError);
}
