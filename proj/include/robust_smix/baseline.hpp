#pragma once

#include <cstdint>
#include <vector>

#include "robust_smix/model.hpp"

namespace robust_smix {

struct GmmEmResult {
  std::vector<int> labels;
  Matrix responsibilities;
  std::vector<double> loglik_trace;  // log-likelihood of the parameters entering each E-step
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  int jitter_events = 0;
};

/// Classical maximum-likelihood EM for a Gaussian mixture, seeded by k-means++
/// plus Lloyd steps. Data with missing cells require `mean_impute`, which
/// fills each with its feature's observed mean. Stops when the log-likelihood
/// gain falls below tol * (1 + |L|).
GmmEmResult gmm_em_baseline(const MaskedDataset& data, int K, std::uint64_t seed, int max_iter = 200,
                            bool mean_impute = false, double tol = 1e-10);

}  // namespace robust_smix
