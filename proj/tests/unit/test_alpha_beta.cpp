#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "quadrature.hpp"
#include "robust_smix/alpha_beta.hpp"
#include "robust_smix/errors.hpp"
#include "robust_smix/numerics.hpp"

using namespace robust_smix;

TEST_CASE("unnormalized log density") {
  CHECK(log_density_unnormalized(1.0, AlphaDensityParams::from_p(1, 1, 1, 1)) == doctest::Approx(0.0));
  CHECK(log_density_unnormalized(1.0, AlphaDensityParams::from_p(1, std::exp(1.0), 1, 1)) ==
        doctest::Approx(-2.0).epsilon(1e-14));
  const double p = 0.8, q = 1.3, s = 2.0, r = 3.0, a = 2.5;
  const double expect =
      (a - 1) * std::log(p) + boost::math::lgamma(s * a + 1) - (s * a + 1) * std::log(q) - r * boost::math::lgamma(a);
  CHECK(log_density_unnormalized(a, AlphaDensityParams::from_p(p, q, s, r)) == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(log_density_unnormalized(0.0, AlphaDensityParams{}), DomainError);
  CHECK_THROWS_AS(log_density_unnormalized(-1.0, AlphaDensityParams{}), DomainError);
}

TEST_CASE("analytic derivatives match finite differences") {
  const AlphaDensityParams prm = AlphaDensityParams::from_p(0.7, 1.6, 1.5, 2.0);
  for (double a : {0.05, 0.4, 1.0, 3.3, 17.0}) {
    const LogDerivs dv = log_density_derivs(a, prm);
    const double h = 1e-5 * a;
    const double fp = log_density_unnormalized(a + h, prm), fm = log_density_unnormalized(a - h, prm);
    CHECK(dv.value == doctest::Approx(log_density_unnormalized(a, prm)).epsilon(1e-14));
    CHECK(dv.d1 == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    CHECK(dv.d2 == doctest::Approx((fp - 2 * dv.value + fm) / (h * h)).epsilon(1e-4));
  }
}

TEST_CASE("mode found at a constructed stationary point") {
  const double q = 1.7, s = 0.8, r = 2.0;
  // u'(1) = log p + s psi(s+1) - s log q - r psi(1) = 0
  const double log_p = -s * digamma(s + 1.0) + s * std::log(q) + r * digamma(1.0);
  const AlphaDensityParams prm{log_p, q, s, r};
  const LaplaceResult m = find_mode(prm);
  CHECK(m.converged);
  CHECK(std::abs(m.mode - 1.0) < 1e-8);
  const LogDerivs at = log_density_derivs(m.mode, prm);
  CHECK(std::abs(at.d1) <= 1e-9 * std::max(1.0, std::abs(at.value)));
  CHECK(at.d2 < 0.0);

  const LaplaceResult same = find_mode(prm, constant_weight(3.5));
  CHECK(same.mode == doctest::Approx(m.mode).epsilon(1e-10));
}

TEST_CASE("flat or improper densities are rejected") {
  // r < 1 with s = 1 and large p: the log density keeps increasing over the bracket.
  CHECK_THROWS_AS(find_mode(AlphaDensityParams::from_p(5.0, 0.5, 1.0, 1.0)), LaplaceError);
  CHECK_THROWS_AS(find_mode([](double) { return LogDerivs{0.0, 0.0, 0.0}; }), LaplaceError);
}

TEST_CASE("Laplace is exact on a Gaussian log integrand") {
  const double m = 5.0, sigma = 0.4;
  const LaplaceResult res = laplace_log_integral([&](double a) {
    return LogDerivs{-(a - m) * (a - m) / (2 * sigma * sigma), -(a - m) / (sigma * sigma), -1.0 / (sigma * sigma)};
  });
  CHECK(res.mode == doctest::Approx(m).epsilon(1e-12));
  CHECK(res.value() == doctest::Approx(sigma * std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("Laplace integral on a sharply peaked density") {
  // Large r and p concentrate the density around its mode.
  const AlphaDensityParams prm = AlphaDensityParams::from_p(std::exp(40.0), 1.0, 1.0, 30.0);
  const double lap = laplace_integral(prm, constant_weight(1.0));
  const oracle::AlphaMoments quad = oracle::alpha_moments(prm.log_p, prm.q, prm.s, prm.r, 1e-6, 1e3);
  CHECK(std::log(lap) == doctest::Approx(quad.log_mass).epsilon(0.02));
  CHECK(std::abs(lap / std::exp(quad.log_mass) - 1.0) < 0.02);
}

TEST_CASE("expectations on a Gamma-like density") {
  // s -> 0 and r = 1 leave p^(alpha-1) / Gamma(alpha), peaked near exp(log p).
  const AlphaDensityParams prm{boost::math::digamma(5.0), 1.0, 1e-8, 1.0};
  const AlphaExpectations e = posterior_expectations(prm);
  const oracle::AlphaMoments quad = oracle::alpha_moments(prm.log_p, prm.q, prm.s, prm.r);
  CHECK(std::abs(e.e_alpha / quad.e_alpha - 1.0) < 0.05);
  CHECK(e.e_alpha > 4.0);
  CHECK(e.e_alpha < 6.0);
  CHECK(std::abs(e.e_psi - (-kEulerGamma)) < 1e-3);
  CHECK(std::isfinite(e.log_normalizer));
}

TEST_CASE("shifted weights keep log Gamma expectations well defined near its minimum") {
  // A density concentrated on (1, 2), where log Gamma is negative.
  const double log_p = boost::math::digamma(1.5) * 20.0;
  const AlphaDensityParams prm{log_p, 1.0, 1e-6, 20.0};
  const AlphaExpectations e = posterior_expectations(prm);
  const oracle::AlphaMoments quad = oracle::alpha_moments(prm.log_p, prm.q, prm.s, prm.r);
  CHECK(e.e_alpha == doctest::Approx(quad.e_alpha).epsilon(0.02));
  CHECK(e.e_log_gamma_alpha < 0.0);
  CHECK(std::abs(e.e_log_gamma_alpha - quad.e_log_gamma) < 0.02 * std::abs(quad.e_alpha));
}

TEST_CASE("ratio is invariant to an affine change of variable") {
  const AlphaDensityParams prm = AlphaDensityParams::from_p(2.0, 1.0, 1.0, 4.0);
  auto u = [&](double a) { return log_density_derivs(a, prm); };
  auto hu = [&](double a) {
    LogDerivs v = log_density_derivs(a, prm);
    v.value += std::log(a);
    v.d1 += 1.0 / a;
    v.d2 -= 1.0 / (a * a);
    return v;
  };
  const double ratio = std::exp(laplace_log_integral(hu).log_value - laplace_log_integral(u).log_value);

  // alpha = b t with b = 2: the density picks up log b, derivatives scale by b and b^2.
  const double b = 2.0;
  auto mapped = [b](const LogTarget& f) {
    return LogTarget([f, b](double t) {
      LogDerivs v = f(b * t);
      return LogDerivs{v.value + std::log(b), b * v.d1, b * b * v.d2};
    });
  };
  const double ratio_t =
      std::exp(laplace_log_integral(mapped(hu)).log_value - laplace_log_integral(mapped(u)).log_value);
  CHECK(ratio_t == doctest::Approx(ratio).epsilon(1e-10));
  CHECK(ratio == doctest::Approx(posterior_expectations(prm).e_alpha).epsilon(1e-10));
}

TEST_CASE("beta expectations") {
  const auto b1 = beta_expectations(AlphaDensityParams{0.0, 2.0, 1.0, 1.0}, 1.0, 0.0);
  CHECK(b1.e_beta == doctest::Approx(1.0));
  const auto b2 = beta_expectations(AlphaDensityParams{0.0, 1.0, 3.0, 1.0}, 2.0, 0.0);
  CHECK(b2.e_beta == doctest::Approx(7.0));
  const auto b3 = beta_expectations(AlphaDensityParams{0.0, 4.0, 0.0, 1.0}, 3.0, digamma(1.0));
  CHECK(b3.e_beta == doctest::Approx(0.25));
  CHECK(b3.e_log_beta == doctest::Approx(digamma(1.0) - std::log(4.0)));
}
