#include "robust_smix/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

constexpr double kShiftThreshold = 8.0;
constexpr double kHalfLogTwoPi = 0.91893853320467274178;
constexpr double kLogPi = 1.1447298858494001741;

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || std::isnan(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive, got " +
                      std::to_string(x));
  }
}

// zeta(k) for k = 2..26, used in the Taylor expansion of log Gamma(1 + z).
constexpr std::array<double, 25> kZeta = {
    1.6449340668482264365, 1.2020569031595942854, 1.0823232337111381915,
    1.0369277551433699263, 1.0173430619844491397, 1.0083492773819228268,
    1.0040773561979443394, 1.0020083928260822144, 1.0009945751278180853,
    1.0004941886041194646, 1.0002460865533080483, 1.0001227133475784891,
    1.0000612481350587048, 1.0000305882363070205, 1.0000152822594086519,
    1.0000076371976378998, 1.0000038172932649998, 1.0000019082127165539,
    1.0000009539620338728, 1.0000004769329867878, 1.0000002384505027277,
    1.0000001192199259653, 1.0000000596081890513, 1.0000000298035035147,
    1.0000000149015548284};

// log Gamma(1 + z) for |z| <= 0.25; keeps full relative accuracy at the roots.
double log_gamma_one_plus(double z) {
  double sum = 0.0;
  double zk = -z;
  for (std::size_t i = 0; i < kZeta.size(); ++i) {
    zk *= -z;  // (-z)^k with k = i + 2
    sum += kZeta[i] * zk / static_cast<double>(i + 2);
  }
  return -kEulerGamma * z + sum;
}

double stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv *
      (1.0 / 12.0 +
       inv2 * (-1.0 / 360.0 +
               inv2 * (1.0 / 1260.0 +
                       inv2 * (-1.0 / 1680.0 +
                               inv2 * (1.0 / 1188.0 +
                                       inv2 * (-691.0 / 360360.0 +
                                               inv2 * (1.0 / 156.0)))))));
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi + series;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (std::fabs(x - 1.0) <= 0.25) return log_gamma_one_plus(x - 1.0);
  if (std::fabs(x - 2.0) <= 0.25) {
    const double z = x - 2.0;
    return std::log1p(z) + log_gamma_one_plus(z);
  }
  if (x >= kShiftThreshold) return stirling(x);
  // log Gamma(x) = log Gamma(x + n) - log(x (x+1) ... (x+n-1))
  double product = 1.0;
  double shifted = x;
  while (shifted < kShiftThreshold) {
    product *= shifted;
    shifted += 1.0;
  }
  return stirling(shifted) - std::log(product);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double acc = 0.0;
  while (x < kShiftThreshold) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 *
      (1.0 / 12.0 -
       inv2 * (1.0 / 120.0 -
               inv2 * (1.0 / 252.0 -
                       inv2 * (1.0 / 240.0 -
                               inv2 * (1.0 / 132.0 -
                                       inv2 * (691.0 / 32760.0 -
                                               inv2 * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < kShiftThreshold) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * inv2 *
      (1.0 / 6.0 -
       inv2 * (1.0 / 30.0 -
               inv2 * (1.0 / 42.0 -
                       inv2 * (1.0 / 30.0 -
                               inv2 * (5.0 / 66.0 -
                                       inv2 * (691.0 / 2730.0 -
                                               inv2 * (7.0 / 6.0)))))));
  return acc + inv + 0.5 * inv2 + series;
}

double tetragamma(double x) {
  require_positive(x, "tetragamma");
  double acc = 0.0;
  while (x < kShiftThreshold) {
    acc -= 2.0 / (x * x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * inv2 *
      (0.5 -
       inv2 * (1.0 / 6.0 -
               inv2 * (1.0 / 6.0 -
                       inv2 * (3.0 / 10.0 -
                               inv2 * (5.0 / 6.0 -
                                       inv2 * (691.0 / 210.0 -
                                               inv2 * (35.0 / 2.0)))))));
  return acc - inv2 - inv2 * inv - series;
}

double multivariate_log_gamma(int d, double a) {
  if (d < 1) throw DomainError("multivariate_log_gamma: dimension must be >= 1");
  if (!(a > 0.5 * (d - 1))) {
    throw DomainError("multivariate_log_gamma: need a > (d-1)/2, got a=" +
                      std::to_string(a) + " d=" + std::to_string(d));
  }
  double sum = 0.25 * d * (d - 1) * kLogPi;
  for (int i = 1; i <= d; ++i) sum += log_gamma(a + 0.5 * (1 - i));
  return sum;
}

Matrix cholesky(const Matrix& s) {
  if (s.rows() != s.cols()) throw DomainError("cholesky: matrix must be square");
  const Eigen::Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw FactorizationError(
          "cholesky: matrix is not positive definite (pivot " + std::to_string(j) + ")",
          static_cast<std::size_t>(j));
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

double spd_logdet(const Matrix& s) {
  const Matrix l = cholesky(s);
  return 2.0 * l.diagonal().array().log().sum();
}

Matrix spd_solve(const Matrix& s, const Matrix& b) {
  if (b.rows() != s.rows()) throw DomainError("spd_solve: shape mismatch");
  const Matrix l = cholesky(s);
  const auto tri = l.triangularView<Eigen::Lower>();
  Matrix y = tri.solve(b);
  return tri.transpose().solve(y);
}

double log_sum_exp(std::span<const double> v) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw DomainError("log_sum_exp: entries must be finite or -inf");
    }
    peak = std::max(peak, x);
  }
  if (peak == -std::numeric_limits<double>::infinity()) {
    throw DegenerateError("log_sum_exp: all entries are -inf");
  }
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - peak);
  return peak + std::log(sum);
}

SpdMatrix SpdMatrix::from(Matrix m) {
  if (m.rows() != m.cols()) throw DomainError("SpdMatrix: matrix must be square");
  if (m.size() > 0) {
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw DomainError("SpdMatrix: matrix is not symmetric");
    }
  }
  Matrix l = cholesky(m);
  return SpdMatrix(std::move(m), std::move(l));
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Matrix::Identity(dim, dim), Matrix::Identity(dim, dim));
}

double SpdMatrix::logdet() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Matrix SpdMatrix::solve(const Matrix& b) const {
  const auto tri = lower_.triangularView<Eigen::Lower>();
  Matrix y = tri.solve(b);
  return tri.transpose().solve(y);
}

Vector SpdMatrix::solve(const Vector& b) const {
  const auto tri = lower_.triangularView<Eigen::Lower>();
  Vector y = tri.solve(b);
  return tri.transpose().solve(y);
}

Matrix SpdMatrix::inverse() const {
  return solve(Matrix(Matrix::Identity(dim(), dim())));
}

double SpdMatrix::inverse_quadratic(const Vector& v) const {
  const Vector y = lower_.triangularView<Eigen::Lower>().solve(v);
  return y.squaredNorm();
}

double SpdMatrix::trace_inverse_product(const Matrix& a) const {
  return solve(a).trace();
}

std::optional<JitteredFactor> factor_with_jitter(const Matrix& s) {
  try {
    return JitteredFactor{SpdMatrix::from(s), 0.0};
  } catch (const FactorizationError&) {
  }
  const Eigen::Index d = s.rows();
  const double base = std::max(std::fabs(s.trace()) / static_cast<double>(d),
                               std::numeric_limits<double>::min());
  double factor = 1e-10;
  for (int attempt = 0; attempt < 4; ++attempt, factor *= 10.0) {
    const double jitter = factor * base;
    Matrix m = s;
    m.diagonal().array() += jitter;
    try {
      return JitteredFactor{SpdMatrix::from(std::move(m)), jitter};
    } catch (const FactorizationError&) {
    }
  }
  return std::nullopt;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace robust_smix
