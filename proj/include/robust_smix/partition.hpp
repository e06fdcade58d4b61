#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "robust_smix/model.hpp"
#include "robust_smix/numerics.hpp"

namespace robust_smix {

/// Mean and covariance split into missing and observed blocks.
struct GaussianBlocks {
  Vector mu_obs;
  Vector mu_miss;
  Matrix Sigma_obs;
  Matrix Sigma_miss;
  Matrix Sigma_cov;  // d_miss x d_obs
  std::vector<Eigen::Index> observed_index;
  std::vector<Eigen::Index> missing_index;

  Eigen::Index dim() const {
    return static_cast<Eigen::Index>(observed_index.size() + missing_index.size());
  }
};

GaussianBlocks partition(const Vector& mu, const Matrix& Sigma, const std::vector<bool>& observed);

/// Inverse of partition: scatter the blocks back to feature order.
std::pair<Vector, Matrix> reassemble(const GaussianBlocks& blocks);

/// Moments of x_miss given x_obs under one cluster.
struct ConditionalMoments {
  Vector eps_miss;
  SpdMatrix delta_miss;
  SpdMatrix delta_obs;
  double logdet_delta_miss = 0.0;
};

/// Row-independent part of the conditional for one (cluster, pattern) pair:
/// factorizations and the regression of missing on observed features.
class PatternConditional {
 public:
  PatternConditional() = default;

  /// Throws SingularBlockError tagged with `cluster` when a block cannot be
  /// factorized.
  static PatternConditional build(GaussianBlocks blocks, double gamma, MarginalMode mode,
                                  std::size_t cluster = 0);

  Vector conditional_mean(const Vector& x_obs) const;
  const GaussianBlocks& blocks() const noexcept { return blocks_; }
  const SpdMatrix& delta_miss() const noexcept { return delta_miss_; }
  const SpdMatrix& delta_obs() const noexcept { return delta_obs_; }
  double logdet_delta_miss() const noexcept { return logdet_delta_miss_; }

 private:
  GaussianBlocks blocks_;
  Matrix regression_;  // Sigma_cov Sigma_obs^{-1}
  SpdMatrix delta_miss_;
  SpdMatrix delta_obs_;
  double logdet_delta_miss_ = 0.0;
};

/// eps = mu_miss + Sigma_cov Sigma_obs^{-1} (x_obs - mu_obs);
/// Delta_miss = (Sigma_miss - Sigma_cov Sigma_obs^{-1} Sigma_cov') / gamma;
/// Delta_obs = Sigma_obs / gamma (consistent) or the literal
/// (Sigma_obs^{-1} + 2 Sigma_obs^{-1} Sigma_cov' S^{-1} Sigma_cov Sigma_obs^{-1})^{-1} / gamma.
ConditionalMoments conditional_moments(const Vector& x_obs, const GaussianBlocks& blocks,
                                       double gamma, MarginalMode mode);

/// x~_j (observed values and eps_miss in feature order) and Delta_k^{x_j}
/// (Delta_miss in the missing-missing block, zero elsewhere).
std::pair<Vector, Matrix> completed_moments(const Vector& x_obs, const ConditionalMoments& cm,
                                            const std::vector<Eigen::Index>& observed_index,
                                            const std::vector<Eigen::Index>& missing_index);

}  // namespace robust_smix
