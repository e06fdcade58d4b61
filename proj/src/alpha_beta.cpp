#include "robust_smix/alpha_beta.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "robust_smix/errors.hpp"
#include "robust_smix/numerics.hpp"

namespace robust_smix {
namespace {

constexpr int kScanPoints = 400;
constexpr int kMaxNewton = 200;
// Minimum of log Gamma on (0, inf), attained at 1.4616321449683623.
constexpr double kLogGammaMin = -0.12148629053584961;

void require_params(const AlphaDensityParams& p) {
  if (!std::isfinite(p.log_p) || !(p.q > 0.0) || !(p.s > 0.0) || !(p.r > 0.0) ||
      !std::isfinite(p.q) || !std::isfinite(p.s) || !std::isfinite(p.r)) {
    throw DomainError("alpha density: p, q, s, r must be positive and finite");
  }
}

struct Refined {
  double x = 0.0;
  LogDerivs at;
  bool converged = false;
  int iterations = 0;
};

bool stationary(const LogDerivs& v) {
  return std::fabs(v.d1) <= 1e-9 * std::max(1.0, std::fabs(v.value));
}

// Safeguarded Newton on u' inside [lo, hi] with u'(lo) > 0 > u'(hi).
Refined refine(const LogTarget& u, double lo, double hi) {
  Refined out;
  double x = std::sqrt(lo * hi);
  LogDerivs v = u(x);
  for (int it = 1; it <= kMaxNewton; ++it) {
    out.iterations = it;
    if (stationary(v)) {
      out.converged = true;
      break;
    }
    if (v.d1 > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = (v.d2 < 0.0) ? x - v.d1 / v.d2 : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      x = next;
      v = u(x);
      out.converged = stationary(v) || (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi);
      break;
    }
    x = next;
    v = u(x);
  }
  out.x = x;
  out.at = v;
  return out;
}

}  // namespace

AlphaDensityParams AlphaDensityParams::from_p(double p, double q, double s, double r) {
  if (!(p > 0.0)) throw DomainError("alpha density: p must be positive");
  return AlphaDensityParams{std::log(p), q, s, r};
}

double LaplaceResult::value() const { return std::exp(log_value); }

double log_density_unnormalized(double alpha, const AlphaDensityParams& params) {
  if (!(alpha > 0.0)) throw DomainError("alpha density: alpha must be positive");
  require_params(params);
  const double sa1 = params.s * alpha + 1.0;
  return (alpha - 1.0) * params.log_p + log_gamma(sa1) - sa1 * std::log(params.q) -
         params.r * log_gamma(alpha);
}

LogDerivs log_density_derivs(double alpha, const AlphaDensityParams& params) {
  const double sa1 = params.s * alpha + 1.0;
  LogDerivs out;
  out.value = log_density_unnormalized(alpha, params);
  out.d1 = params.log_p + params.s * digamma(sa1) - params.s * std::log(params.q) -
           params.r * digamma(alpha);
  out.d2 = params.s * params.s * trigamma(sa1) - params.r * trigamma(alpha);
  return out;
}

Weight constant_weight(double c) {
  if (!(c > 0.0)) throw DomainError("constant_weight: c must be positive");
  const double lc = std::log(c);
  return Weight{[lc](double) { return LogDerivs{lc, 0.0, 0.0}; }, 0.0};
}

Weight identity_weight() {
  return Weight{[](double a) { return LogDerivs{std::log(a), 1.0 / a, -1.0 / (a * a)}; }, 0.0};
}

Weight log_gamma_weight() {
  const double c = 1.0 - kLogGammaMin;
  return Weight{[c](double a) {
                  const double h = log_gamma(a) + c;
                  const double g = digamma(a) / h;
                  return LogDerivs{std::log(h), g, trigamma(a) / h - g * g};
                },
                c};
}

Weight digamma_weight(double s) {
  if (!(s > 0.0)) throw DomainError("digamma_weight: s must be positive");
  const double c = 1.0 - digamma(s * kAlphaLower + 1.0);
  return Weight{[s, c](double a) {
                  const double x = s * a + 1.0;
                  const double h = digamma(x) + c;
                  const double g = s * trigamma(x) / h;
                  return LogDerivs{std::log(h), g, s * s * tetragamma(x) / h - g * g};
                },
                c};
}

LaplaceResult find_mode(const LogTarget& u) {
  const double log_lo = std::log(kAlphaLower);
  const double log_hi = std::log(kAlphaUpper);
  double prev_x = kAlphaLower;
  LogDerivs prev = u(prev_x);

  LaplaceResult best;
  bool found = false;
  double best_value = -std::numeric_limits<double>::infinity();
  int maxima = 0;
  int total_iterations = 0;

  for (int i = 1; i < kScanPoints; ++i) {
    const double x = std::exp(log_lo + (log_hi - log_lo) * i / (kScanPoints - 1));
    const LogDerivs cur = u(x);
    if (prev.d1 > 0.0 && cur.d1 <= 0.0) {
      ++maxima;
      const Refined r = (cur.d1 == 0.0) ? Refined{x, cur, true, 0} : refine(u, prev_x, x);
      total_iterations += r.iterations;
      if (r.at.value > best_value) {
        best_value = r.at.value;
        best.mode = r.x;
        best.converged = r.converged;
        best.log_value = r.at.value;
        best.log_curvature = (r.at.d2 < 0.0) ? std::log(-r.at.d2)
                                             : std::numeric_limits<double>::quiet_NaN();
        found = true;
        if (!(r.at.d2 < 0.0)) {
          throw LaplaceError("find_mode: non-negative curvature at candidate mode " +
                             std::to_string(r.x));
        }
      }
    }
    prev = cur;
    prev_x = x;
  }
  if (!found) {
    throw LaplaceError("find_mode: derivative has no sign change on [1e-6, 1e6] "
                       "(flat or improper density)");
  }
  best.iterations = total_iterations;
  best.local_maxima = maxima;
  return best;
}

LaplaceResult find_mode(const AlphaDensityParams& params) {
  require_params(params);
  return find_mode([&params](double a) { return log_density_derivs(a, params); });
}

LaplaceResult find_mode(const AlphaDensityParams& params, const Weight& h) {
  require_params(params);
  return find_mode([&params, &h](double a) {
    LogDerivs base = log_density_derivs(a, params);
    const LogDerivs w = h.log_h(a);
    base.value += w.value;
    base.d1 += w.d1;
    base.d2 += w.d2;
    return base;
  });
}

LaplaceResult laplace_log_integral(const LogTarget& u) {
  LaplaceResult res = find_mode(u);
  res.log_value += 0.5 * kLogTwoPi - 0.5 * res.log_curvature;
  return res;
}

namespace {

LaplaceResult weighted_log_integral(const AlphaDensityParams& params, const Weight& h) {
  require_params(params);
  return laplace_log_integral([&params, &h](double a) {
    LogDerivs base = log_density_derivs(a, params);
    const LogDerivs w = h.log_h(a);
    base.value += w.value;
    base.d1 += w.d1;
    base.d2 += w.d2;
    return base;
  });
}

}  // namespace

double laplace_integral(const AlphaDensityParams& params, const Weight& h) {
  return weighted_log_integral(params, h).value();
}

AlphaExpectations posterior_expectations(const AlphaDensityParams& params) {
  require_params(params);
  AlphaExpectations out;
  const LaplaceResult den =
      laplace_log_integral([&params](double a) { return log_density_derivs(a, params); });
  out.log_normalizer = den.log_value;

  auto note = [&out](const char* what, const LaplaceResult& r) {
    if (r.local_maxima > 1) {
      out.notes.push_back(std::string(what) + ": " + std::to_string(r.local_maxima) +
                          " local maxima, global maximum at " + std::to_string(r.mode));
    }
  };
  note("density", den);

  auto ratio = [&](const Weight& w, const char* what) {
    const LaplaceResult num = weighted_log_integral(params, w);
    note(what, num);
    return std::exp(num.log_value - den.log_value) - w.shift;
  };
  out.e_alpha = ratio(identity_weight(), "E[alpha]");
  out.e_log_gamma_alpha = ratio(log_gamma_weight(), "E[log Gamma(alpha)]");
  out.e_psi = ratio(digamma_weight(params.s), "E[psi(s alpha + 1)]");
  return out;
}

BetaExpectations beta_expectations(const AlphaDensityParams& params, double e_alpha, double e_psi) {
  return BetaExpectations{(params.s * e_alpha + 1.0) / params.q, e_psi - std::log(params.q)};
}

}  // namespace robust_smix
