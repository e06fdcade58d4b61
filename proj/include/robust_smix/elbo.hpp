#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robust_smix/model.hpp"

namespace robust_smix {

/// Expected log joint, expected log variational density, and their pieces.
/// Each block below is (expected log prior/likelihood) - (expected log q) for
/// the same variables, so the blocks sum to `total`.
struct ElboBreakdown {
  double expected_log_joint = 0.0;
  double entropy_term = 0.0;  // E_q[log q(H, Theta)]
  double total = 0.0;

  double data = 0.0;     // E[log p(x | z, u, mu, Sigma)], including the imputed block
  double label = 0.0;    // E[log p(z | a)] - E[log q(z)]
  double scale = 0.0;    // E[log p(u | alpha, beta)] - E[log q(u)]
  double missing = 0.0;  // -E[log q(x_miss | u, z)]
  double weights = 0.0;     // -KL for a
  double mean_cov = 0.0;    // -KL for (mu, Sigma)
  double alpha_beta = 0.0;  // -KL for (alpha, beta)

  double data_dependent() const { return data + label + scale + missing; }
  /// Names of non-finite subtotals.
  std::vector<std::string> non_finite() const;
};

/// log c_D(kappa) = log Gamma(sum kappa) - sum log Gamma(kappa_k).
double log_dirichlet_norm(const std::vector<double>& kappa);
/// log c_IW(gamma, S) = (gamma/2) log|S| - (gamma d / 2) log 2 - log Gamma_d(gamma/2).
double log_inverse_wishart_norm(double gamma, const SpdMatrix& S);

/// Bound for the current (clusters, latent) pair. The cached expectations of
/// `clusters` must be fresh.
ElboBreakdown compute_elbo(const MaskedDataset& data, const std::vector<ClusterPosterior>& clusters,
                           const LatentPosterior& latent, const PriorSpec& priors, const FitConfig& config);

/// (converged, decrease diagnostic). Requires at least two trace points;
/// with fewer returns (false, nullopt).
std::pair<bool, std::optional<Diagnostic>> check_convergence(const std::vector<TracePoint>& trace,
                                                             const FitConfig& config);

/// Two columns "iteration,elbo", 17 significant digits.
void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace);

}  // namespace robust_smix
