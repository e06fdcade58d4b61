#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace robust_smix {

/// Argument outside the domain of a special function or density.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// A block of a cluster covariance could not be factorized.
class SingularBlockError : public std::runtime_error {
 public:
  SingularBlockError(const std::string& what, std::size_t cluster)
      : std::runtime_error(what), cluster_(cluster) {}
  std::size_t cluster() const noexcept { return cluster_; }

 private:
  std::size_t cluster_;
};

/// Posterior scatter matrix stayed indefinite after all jitter escalations.
class CovarianceCollapseError : public std::runtime_error {
 public:
  CovarianceCollapseError(const std::string& what, std::size_t cluster)
      : std::runtime_error(what), cluster_(cluster) {}
  std::size_t cluster() const noexcept { return cluster_; }

 private:
  std::size_t cluster_;
};

/// Invalid priors, configuration or dataset shape.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Log-weights or responsibilities that cannot be normalized.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mode search for a one-dimensional log-density failed.
class LaplaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV or key/value input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace robust_smix
