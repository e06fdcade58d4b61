#pragma once

#include <functional>
#include <string>
#include <vector>

namespace robust_smix {

/// Parameters of the unnormalized density
///   q(alpha) = p^(alpha-1) Gamma(s alpha + 1) / (q^(s alpha + 1) Gamma(alpha)^r),  alpha > 0.
/// p is carried as log p so posterior values exp(J * mean log u) never overflow.
struct AlphaDensityParams {
  double log_p = 0.0;
  double q = 1.0;
  double s = 1.0;
  double r = 1.0;

  static AlphaDensityParams from_p(double p, double q, double s, double r);
};

/// Value and first two derivatives of a scalar log-function.
struct LogDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

using LogTarget = std::function<LogDerivs(double)>;

struct LaplaceResult {
  double log_value = 0.0;  // log of the Laplace estimate of the integral
  double mode = 0.0;
  double log_curvature = 0.0;  // log |u''(mode)|
  bool converged = false;
  int iterations = 0;
  int local_maxima = 0;  // stationary maxima found on the scan grid

  double value() const;
};

inline constexpr double kAlphaLower = 1e-6;
inline constexpr double kAlphaUpper = 1e6;

double log_density_unnormalized(double alpha, const AlphaDensityParams& params);
LogDerivs log_density_derivs(double alpha, const AlphaDensityParams& params);

/// A smooth positive weight h, given through log h and its derivatives.
struct Weight {
  LogTarget log_h;
  /// Constant subtracted after forming E[h]; nonzero for shifted weights.
  double shift = 0.0;
};

Weight constant_weight(double c);
Weight identity_weight();  // h(alpha) = alpha
/// h = log Gamma(alpha) + c with c = 1 - min over the bracket.
Weight log_gamma_weight();
/// h = psi(s alpha + 1) + c with c = 1 - psi(s * lower + 1).
Weight digamma_weight(double s);

/// Maximizes u(alpha) over [kAlphaLower, kAlphaUpper] by a log-spaced scan of
/// u' followed by safeguarded Newton in each sign-change bracket. The global
/// maximum among stationary points is returned. Throws LaplaceError when u'
/// has no + to - sign change (flat or improper density) or the curvature at
/// the candidate is not negative.
LaplaceResult find_mode(const LogTarget& u);
LaplaceResult find_mode(const AlphaDensityParams& params);
LaplaceResult find_mode(const AlphaDensityParams& params, const Weight& h);

/// Laplace estimate exp(u(a0)) (2 pi)^(1/2) |u''(a0)|^(-1/2) of the integral of
/// exp(u); the mode search is as in find_mode.
LaplaceResult laplace_log_integral(const LogTarget& u);

/// Laplace estimate of the integral of h(alpha) q(alpha).
double laplace_integral(const AlphaDensityParams& params, const Weight& h);

struct AlphaExpectations {
  double e_alpha = 0.0;
  double e_log_gamma_alpha = 0.0;
  double e_psi = 0.0;  // E[psi(s alpha + 1)]
  double log_normalizer = 0.0;  // log M
  std::vector<std::string> notes;  // multimodality warnings
};

/// Each expectation is the ratio of two Laplace integrals, formed in the log
/// domain; log M is the log of the denominator.
AlphaExpectations posterior_expectations(const AlphaDensityParams& params);

struct BetaExpectations {
  double e_beta = 0.0;
  double e_log_beta = 0.0;
};

/// E[beta] = (s E[alpha] + 1) / q,  E[log beta] = E[psi(s alpha + 1)] - log q.
BetaExpectations beta_expectations(const AlphaDensityParams& params, double e_alpha, double e_psi);

}  // namespace robust_smix
