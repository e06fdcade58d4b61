#include <doctest.h>

#include <cmath>
#include <random>

#include "robust_smix/errors.hpp"
#include "robust_smix/partition.hpp"

using namespace robust_smix;

namespace {

Matrix random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return a * a.transpose() + 0.3 * Matrix::Identity(d, d);
}

double log_normal(const Vector& x, const Vector& mu, const Matrix& S) {
  const Eigen::LLT<Matrix> llt(S);
  const Vector z = llt.matrixL().solve(x - mu);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (x.size() * kLogTwoPi + logdet + z.squaredNorm());
}

}  // namespace

TEST_CASE("partition selects blocks by index") {
  Matrix S(2, 2);
  S << 2.0, 0.7, 0.7, 3.0;
  const Vector mu = Eigen::Vector2d(-1.0, 4.0);

  const GaussianBlocks all = partition(mu, S, {true, true});
  CHECK(all.Sigma_obs == S);
  CHECK(all.mu_miss.size() == 0);
  CHECK(all.Sigma_cov.rows() == 0);

  const GaussianBlocks b = partition(mu, S, {false, true});
  CHECK(b.Sigma_miss(0, 0) == 2.0);
  CHECK(b.Sigma_obs(0, 0) == 3.0);
  CHECK(b.Sigma_cov(0, 0) == 0.7);
  CHECK(b.mu_miss(0) == -1.0);

  const GaussianBlocks none = partition(mu, S, {false, false});
  CHECK(none.Sigma_miss == S);
  CHECK(none.mu_obs.size() == 0);
}

TEST_CASE("reassembly is exact") {
  std::mt19937_64 rng(21);
  for (int d = 1; d <= 5; ++d) {
    const Matrix S = random_spd(d, rng);
    const Vector mu = Vector::Random(d);
    for (unsigned bits = 0; bits < (1u << d); ++bits) {
      std::vector<bool> obs(d);
      for (int i = 0; i < d; ++i) obs[i] = (bits >> i) & 1u;
      const auto [m2, S2] = reassemble(partition(mu, S, obs));
      CHECK(m2 == mu);
      CHECK(S2 == S);
    }
  }
}

TEST_CASE("conditional moments: worked 2-D example") {
  Matrix S(2, 2);
  S << 1.0, 0.5, 0.5, 1.0;
  const GaussianBlocks b = partition(Vector::Zero(2), S, {false, true});
  const Vector x_obs = Vector::Constant(1, 1.0);

  const ConditionalMoments c = conditional_moments(x_obs, b, 1.0, MarginalMode::consistent);
  CHECK(c.eps_miss(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.delta_miss.matrix()(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(c.delta_obs.matrix()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.logdet_delta_miss == doctest::Approx(std::log(0.75)));

  const ConditionalMoments lit = conditional_moments(x_obs, b, 1.0, MarginalMode::paper_literal);
  CHECK(lit.eps_miss(0) == doctest::Approx(0.5));
  CHECK(lit.delta_miss.matrix()(0, 0) == doctest::Approx(0.75));
  CHECK(lit.delta_obs.matrix()(0, 0) == doctest::Approx(0.6).epsilon(1e-14));

  const auto [xt, D] = completed_moments(x_obs, c, b.observed_index, b.missing_index);
  CHECK(xt(0) == doctest::Approx(0.5));
  CHECK(xt(1) == 1.0);
  CHECK(D(0, 0) == doctest::Approx(0.75));
  CHECK(D(0, 1) == 0.0);
  CHECK(D(1, 1) == 0.0);

  // gamma scales both spreads.
  const ConditionalMoments g = conditional_moments(x_obs, b, 4.0, MarginalMode::consistent);
  CHECK(g.delta_miss.matrix()(0, 0) == doctest::Approx(0.1875));
  CHECK(g.delta_obs.matrix()(0, 0) == doctest::Approx(0.25));
  CHECK(g.eps_miss(0) == doctest::Approx(0.5));
}

TEST_CASE("conditional moments: degenerate masks") {
  const Vector mu = Eigen::Vector3d(1.0, 2.0, 3.0);
  const GaussianBlocks id = partition(mu, Matrix::Identity(3, 3), {true, false, true});
  for (auto mode : {MarginalMode::consistent, MarginalMode::paper_literal}) {
    const ConditionalMoments c = conditional_moments(Eigen::Vector2d(9.0, -9.0), id, 1.0, mode);
    CHECK(c.eps_miss(0) == 2.0);
    CHECK(c.delta_miss.matrix()(0, 0) == doctest::Approx(1.0));
    CHECK(c.delta_obs.matrix().isApprox(Matrix::Identity(2, 2)));
  }

  Matrix S(2, 2);
  S << 2.0, 0.3, 0.3, 1.0;
  const GaussianBlocks full = partition(Vector::Zero(2), S, {true, true});
  for (auto mode : {MarginalMode::consistent, MarginalMode::paper_literal}) {
    const ConditionalMoments c = conditional_moments(Eigen::Vector2d(1.0, 1.0), full, 2.0, mode);
    CHECK(c.eps_miss.size() == 0);
    CHECK(c.logdet_delta_miss == 0.0);
    CHECK(c.delta_obs.matrix().isApprox(S / 2.0));
    const auto [xt, D] = completed_moments(Eigen::Vector2d(1.0, 1.0), c, full.observed_index, full.missing_index);
    CHECK(xt == Eigen::Vector2d(1.0, 1.0));
    CHECK(D.isZero(0.0));
  }

  const Vector mu2 = mu.head(2);
  const GaussianBlocks none2 = partition(mu2, S, {false, false});
  const ConditionalMoments c = conditional_moments(Vector(0), none2, 1.0, MarginalMode::consistent);
  const auto [xt, D] = completed_moments(Vector(0), c, none2.observed_index, none2.missing_index);
  CHECK(xt == mu2);
  CHECK(D.isApprox(S));
}

TEST_CASE("singular observed block names the cluster") {
  Matrix S(2, 2);
  S << 1.0, 0.0, 0.0, -1.0;
  GaussianBlocks b;
  b.mu_obs = Vector::Zero(2);
  b.Sigma_obs = S;
  b.observed_index = {0, 1};
  try {
    PatternConditional::build(b, 1.0, MarginalMode::consistent, 4);
    FAIL("expected SingularBlockError");
  } catch (const SingularBlockError& e) {
    CHECK(e.cluster() == 4);
  }
}

TEST_CASE("Schur complement is SPD and the factorization is exact") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + trial % 2;
    const Matrix S = random_spd(d, rng);
    const Vector mu = Vector::Random(d);
    std::vector<bool> obs(d, true);
    obs[trial % d] = false;
    if (d == 3 && trial % 4 == 1) obs[(trial + 1) % d] = false;
    const GaussianBlocks b = partition(mu, S, obs);
    const double gamma = 1.0 + 0.5 * (trial % 5);
    const PatternConditional pc = PatternConditional::build(b, gamma, MarginalMode::consistent);
    CHECK_NOTHROW(cholesky(pc.delta_miss().matrix()));

    // Product density N(x_obs | mu_obs, S_obs) N(x_miss | eps, Schur) equals the joint
    // on a 10^3 lattice around the mean.
    double worst = 0.0;
    const Vector sd = S.diagonal().cwiseSqrt();
    for (int a = 0; a < 10; ++a)
      for (int c = 0; c < 10; ++c)
        for (int e = 0; e < (d == 3 ? 10 : 1); ++e) {
          Vector x(d);
          const int idx[3] = {a, c, e};
          for (int i = 0; i < d; ++i) x(i) = mu(i) + sd(i) * (-2.0 + 4.0 * idx[i] / 9.0);
          const Vector xo = b.observed_index.empty() ? Vector(0) : Vector(x(b.observed_index));
          const Vector xm = x(b.missing_index);
          const Vector eps = pc.conditional_mean(xo);
          const double prod = log_normal(xo, b.mu_obs, b.Sigma_obs) +
                              log_normal(xm, eps, gamma * pc.delta_miss().matrix());
          const double joint = log_normal(x, mu, S);
          worst = std::max(worst, std::abs(std::exp(prod) - std::exp(joint)));
        }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(41);
  const Matrix S = random_spd(3, rng);
  const Vector mu = Eigen::Vector3d(0.5, -1.0, 2.0);
  const std::vector<bool> obs = {true, false, false};
  const Vector x_obs = Vector::Constant(1, 1.7);
  const ConditionalMoments c = conditional_moments(x_obs, partition(mu, S, obs), 2.0, MarginalMode::consistent);

  // Reverse the feature order: observed feature becomes index 2.
  Eigen::PermutationMatrix<3> P;
  P.indices() << 2, 1, 0;
  const Matrix Sp = P * S * P.transpose();
  const Vector mup = P * mu;
  const ConditionalMoments cp =
      conditional_moments(x_obs, partition(mup, Sp, {false, false, true}), 2.0, MarginalMode::consistent);
  // Missing order (1, 2) maps to permuted missing order (0, 1) = original (2, 1).
  CHECK(cp.eps_miss(0) == doctest::Approx(c.eps_miss(1)).epsilon(1e-13));
  CHECK(cp.eps_miss(1) == doctest::Approx(c.eps_miss(0)).epsilon(1e-13));
  CHECK(cp.delta_miss.matrix()(0, 0) == doctest::Approx(c.delta_miss.matrix()(1, 1)).epsilon(1e-13));
  CHECK(cp.delta_miss.matrix()(0, 1) == doctest::Approx(c.delta_miss.matrix()(1, 0)).epsilon(1e-13));
  CHECK(cp.logdet_delta_miss == doctest::Approx(c.logdet_delta_miss).epsilon(1e-13));
}
