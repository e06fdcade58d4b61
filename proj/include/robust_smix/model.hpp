#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "robust_smix/numerics.hpp"

namespace robust_smix {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// One distinct row missingness pattern.
struct MaskPattern {
  std::vector<bool> observed;
  std::vector<Eigen::Index> observed_index;
  std::vector<Eigen::Index> missing_index;

  Eigen::Index observed_count() const { return static_cast<Eigen::Index>(observed_index.size()); }
  Eigen::Index missing_count() const { return static_cast<Eigen::Index>(missing_index.size()); }
};

/// Observation matrix with a per-cell mask (true = observed). Masked cells are
/// stored as NaN and never read by the estimators.
class MaskedDataset {
 public:
  MaskedDataset() = default;
  MaskedDataset(Matrix values, BoolMatrix mask, std::vector<std::string> names = {});

  /// Dataset with every cell observed.
  static MaskedDataset fully_observed(Matrix values, std::vector<std::string> names = {});

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index dim() const noexcept { return dim_; }
  bool observed(Eigen::Index row, Eigen::Index col) const { return mask_(row, col); }
  double value(Eigen::Index row, Eigen::Index col) const;
  const Matrix& values() const noexcept { return values_; }
  const BoolMatrix& mask() const noexcept { return mask_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  Eigen::Index observed_count(Eigen::Index row) const;
  Eigen::Index missing_count(Eigen::Index row) const { return dim_ - observed_count(row); }
  bool has_missing() const noexcept { return !mask_.all(); }

  /// Observed sub-vector of a row, in feature order.
  Vector observed_values(Eigen::Index row) const;

  const std::vector<MaskPattern>& patterns() const noexcept { return patterns_; }
  std::size_t pattern_of(Eigen::Index row) const { return pattern_of_row_[static_cast<std::size_t>(row)]; }

  /// Throws ConfigError unless the dataset has at least one row with an
  /// observed cell and every feature has at least one observed cell.
  void require_fit_ready() const;

 private:
  Matrix values_;
  BoolMatrix mask_;
  Eigen::Index dim_ = 0;
  std::vector<std::string> names_;
  std::vector<MaskPattern> patterns_;
  std::vector<std::size_t> pattern_of_row_;
};

/// Prior hyperparameters shared by every cluster.
struct PriorSpec {
  int K = 1;
  double kappa0 = 1.0;  // symmetric Dirichlet concentration
  double eta0 = 0.01;
  Vector mu0;
  double gamma0 = 3.0;
  Matrix Sigma0;  // must be SPD; checked by validate()
  double p0 = 1.0;
  double q0 = 1.0;
  double s0 = 1.0;
  double r0 = 2.0;
};

/// Variational posterior of one cluster plus the expectations the E-step and
/// the bound read from it.
struct ClusterPosterior {
  double kappa = 0.0;
  double eta = 0.0;
  Vector mu;
  double gamma = 0.0;
  SpdMatrix Sigma;
  double log_p = 0.0;  // p is kept in the log domain
  double q = 0.0;
  double s = 0.0;
  double r = 0.0;

  // Cached expectations, filled by refresh_expectations.
  double e_log_weight = 0.0;       // E[log a_k]
  double e_logdet_cov = 0.0;       // E[log |Sigma_k|]
  double e_alpha = 1.0;            // E[alpha_k]
  double e_log_gamma_alpha = 0.0;  // E[log Gamma(alpha_k)]
  double e_psi = 0.0;              // E[psi(s alpha_k + 1)]
  double e_beta = 1.0;             // E[beta_k]
  double e_log_beta = 0.0;         // E[log beta_k]
  double log_normalizer = 0.0;     // log M_k

  bool active = true;

  Eigen::Index dim() const { return mu.size(); }
  /// E[Sigma_k^{-1}] = gamma * Sigma^{-1}
  Matrix expected_precision() const { return gamma * Sigma.inverse(); }
};

enum class InitMethod { kmeanspp, random };
enum class MarginalMode { consistent, paper_literal };
enum class ModelKind { student, gaussian };
enum class ScatterMode { unnormalized, normalized };

struct FitConfig {
  int max_iterations = 500;
  double elbo_rel_tolerance = 1e-8;
  std::uint64_t seed = 0;
  InitMethod init_method = InitMethod::kmeanspp;
  MarginalMode marginal_mode = MarginalMode::consistent;
  ModelKind model_kind = ModelKind::student;
  double min_responsibility_floor = 0.0;
  ScatterMode scatter_mode = ScatterMode::unnormalized;
  /// Worker cap; 0 means ROBUST_SMIX_THREADS or hardware concurrency.
  int threads = 0;
};

/// Per-row latent posteriors. Row j, cluster k.
struct LatentPosterior {
  Matrix responsibilities;     // J x K, rows sum to one
  Matrix log_rho;              // J x K unnormalized log responsibilities
  Matrix scale_shape;          // alpha~_jk
  Matrix scale_rate;           // beta~_jk
  Matrix e_u;                  // E[u_j | z_j = k]
  Matrix e_log_u;              // E[log u_j | z_j = k]
  Matrix mahalanobis;          // observed-block distance plus trace term
  std::vector<Matrix> completed;  // per cluster: J x d, x~_j
  /// Per cluster, per pattern: Delta~_k^miss (d_miss x d_miss), and its log det.
  std::vector<std::vector<Matrix>> missing_cov;
  std::vector<std::vector<double>> missing_logdet;
  std::vector<std::size_t> pattern_of_row;
  std::vector<MaskPattern> patterns;

  Eigen::Index rows() const { return responsibilities.rows(); }
  Eigen::Index clusters() const { return responsibilities.cols(); }

  /// Delta_k^{x_j}: d x d, zero outside the (missing, missing) block.
  Matrix missing_covariance(Eigen::Index row, Eigen::Index cluster) const;
};

struct Diagnostic {
  std::string kind;
  int iteration = 0;
  std::string message;
};

struct TracePoint {
  int iteration = 0;
  double elbo = 0.0;
};

struct FitResult {
  PriorSpec priors;
  FitConfig config;
  std::vector<ClusterPosterior> clusters;
  LatentPosterior latent;
  std::vector<TracePoint> elbo_trace;
  bool converged = false;
  std::vector<Diagnostic> diagnostics;
};

/// kappa0=1, eta0=0.01, mu0 = observed feature means, gamma0 = d+2,
/// Sigma0 = diag(observed feature variances), p0=q0=s0=1, r0=2.
PriorSpec default_priors(const MaskedDataset& data, int K);

/// Returns `priors` unchanged when valid; throws ConfigError otherwise.
PriorSpec validate(const PriorSpec& priors, const MaskedDataset& data);
void validate(const FitConfig& config, int K);

std::string to_string(InitMethod m);
std::string to_string(MarginalMode m);
std::string to_string(ModelKind m);
std::string to_string(ScatterMode m);
InitMethod parse_init_method(const std::string& s);
MarginalMode parse_marginal_mode(const std::string& s);
ModelKind parse_model_kind(const std::string& s);
ScatterMode parse_scatter_mode(const std::string& s);

}  // namespace robust_smix
