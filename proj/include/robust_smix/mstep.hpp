#pragma once

#include <vector>

#include "robust_smix/model.hpp"

namespace robust_smix {

/// Per-cluster averages over the J rows.
struct SufficientStats {
  Eigen::Index rows = 0;         // J
  std::vector<double> pi;        // (1/J) sum_j r_jk
  std::vector<double> omega;     // (1/J) sum_j r_jk E[u]
  std::vector<double> delta;     // (1/J) sum_j r_jk E[log u]
  std::vector<Vector> mu_x;      // E[u]-weighted mean of completed rows
  std::vector<Matrix> scatter_x; // E[u]-weighted scatter about mu_x, divided by J omega
  std::vector<Matrix> scatter_m; // sum_j r_jk Delta_k^{x_j}

  std::size_t clusters() const { return pi.size(); }
};

/// Rows are accumulated in ascending order. Throws DegenerateError when a
/// cluster has responsibility mass but zero scale-weighted mass.
SufficientStats sufficient_stats(const LatentPosterior& latent, const MaskedDataset& data);

/// Conjugate updates. Sigma~ is symmetrized and factorized with the jitter
/// fallback; jitter events are appended to `diagnostics` when given. Throws
/// CovarianceCollapseError when no jitter level succeeds. Cached
/// expectations are left at their defaults.
std::vector<ClusterPosterior> update_hyperparameters(const SufficientStats& stats, const PriorSpec& priors,
                                                     ScatterMode scatter = ScatterMode::unnormalized,
                                                     std::vector<Diagnostic>* diagnostics = nullptr);

/// Fills the cached expectations. In gaussian mode the (alpha, beta) block is
/// skipped and its cached values stay at E[alpha] = E[beta] = 1, the others 0.
std::vector<ClusterPosterior> refresh_expectations(std::vector<ClusterPosterior> clusters,
                                                   const PriorSpec& priors,
                                                   ModelKind kind = ModelKind::student,
                                                   std::vector<Diagnostic>* diagnostics = nullptr);

/// E[log |Sigma|] under IW(gamma, Sigma).
double expected_logdet_cov(double gamma, const SpdMatrix& Sigma);

}  // namespace robust_smix
