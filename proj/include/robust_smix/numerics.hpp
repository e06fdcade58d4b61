#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace robust_smix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kLogTwoPi = 1.8378770664093454836;
inline constexpr double kEulerGamma = 0.57721566490153286061;

// Special functions. All throw DomainError for x <= 0.
double log_gamma(double x);
double digamma(double x);
double trigamma(double x);
double tetragamma(double x);

/// log Gamma_d(a) = d(d-1)/4 log(pi) + sum_{i=1..d} log Gamma(a + (1-i)/2).
double multivariate_log_gamma(int d, double a);

/// Lower Cholesky factor of a symmetric positive definite matrix. Only the
/// lower triangle of `s` is read. Throws FactorizationError with the index of
/// the first non-positive pivot.
Matrix cholesky(const Matrix& s);

double spd_logdet(const Matrix& s);
Matrix spd_solve(const Matrix& s, const Matrix& b);

/// log(sum(exp(v))) with max shift. Entries must be finite or -inf.
double log_sum_exp(std::span<const double> v);

/// A symmetric positive definite matrix together with its Cholesky factor.
/// Positive definiteness is defined by factorization success.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  /// Throws DomainError if `m` is not square or not symmetric within 1e-12
  /// relative, FactorizationError if it is not positive definite.
  static SpdMatrix from(Matrix m);

  static SpdMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const Matrix& matrix() const noexcept { return matrix_; }
  const Matrix& lower() const noexcept { return lower_; }

  double logdet() const;
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  Matrix inverse() const;
  /// v' S^{-1} v
  double inverse_quadratic(const Vector& v) const;
  /// trace(A S^{-1}) for square A of matching size.
  double trace_inverse_product(const Matrix& a) const;

 private:
  SpdMatrix(Matrix m, Matrix l) : matrix_(std::move(m)), lower_(std::move(l)) {}

  Matrix matrix_;
  Matrix lower_;
};

struct JitteredFactor {
  SpdMatrix value;
  /// Amount added to every diagonal entry; zero when no jitter was needed.
  double jitter = 0.0;
};

/// Factorize, adding 1e-10 * trace/d to the diagonal on failure and escalating
/// by x10 at most three times. Returns nullopt when every attempt fails.
std::optional<JitteredFactor> factor_with_jitter(const Matrix& s);

/// (A + A') / 2
Matrix symmetrized(const Matrix& a);

}  // namespace robust_smix
