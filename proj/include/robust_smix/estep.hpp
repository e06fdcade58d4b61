#pragma once

#include <span>
#include <vector>

#include "robust_smix/model.hpp"
#include "robust_smix/partition.hpp"

namespace robust_smix {

/// Read-only view of one cluster for an E-step pass: its posterior and the
/// conditional-Gaussian factorizations for every missingness pattern.
struct ClusterReadView {
  const ClusterPosterior* cluster = nullptr;
  std::vector<PatternConditional> patterns;

  const ClusterPosterior& posterior() const { return *cluster; }
};

/// Builds one view per cluster. Views borrow `clusters`, which must outlive them.
std::vector<ClusterReadView> build_read_views(const std::vector<ClusterPosterior>& clusters,
                                              const std::vector<MaskPattern>& patterns,
                                              MarginalMode mode);

/// (x_obs - mu_obs)' Delta_obs^{-1} (x_obs - mu_obs) + trace_dim / eta.
/// The E-step passes the full dimension d as trace_dim: the d/eta term comes
/// from the expectation over mu_k of the full-vector quadratic form.
double expected_mahalanobis(const Vector& x_obs, const Vector& mu_obs, const SpdMatrix& delta_obs,
                            double eta, Eigen::Index trace_dim);

struct ScalePosterior {
  double shape = 0.0;  // alpha~_jk
  double rate = 0.0;   // beta~_jk
  double e_u = 0.0;
  double e_log_u = 0.0;
};

/// alpha~ = E[alpha] + d_obs/2, beta~ = maha/2 + E[beta]; `maha` already
/// includes the trace term.
ScalePosterior scale_posterior(double maha, const ClusterPosterior& cluster, Eigen::Index d_obs);

/// Unnormalized log responsibility with u and x_miss integrated out.
double log_responsibility(double maha, const ClusterPosterior& cluster, Eigen::Index d_obs,
                          double logdet_delta_miss, ModelKind kind);

/// Softmax of one row of log weights, with an optional floor followed by
/// renormalization. Throws DegenerateError naming `row` if every weight is -inf.
std::vector<double> normalize_responsibilities(std::span<const double> log_weights, double floor = 0.0,
                                               Eigen::Index row = 0);

LatentPosterior e_step(const MaskedDataset& data, const std::vector<ClusterReadView>& views,
                       const FitConfig& config);

/// Convenience overload that builds the views.
LatentPosterior e_step(const MaskedDataset& data, const std::vector<ClusterPosterior>& clusters,
                       const FitConfig& config);

}  // namespace robust_smix
