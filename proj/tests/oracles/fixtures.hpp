#pragma once

// Small builders shared by unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "robust_smix/engine.hpp"
#include "robust_smix/mstep.hpp"

namespace fixtures {

using namespace robust_smix;

/// Dirichlet(1) responsibilities, one row per observation.
inline Matrix random_responsibilities(Eigen::Index J, Eigen::Index K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  Matrix R(J, K);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) R(j, k) = e(rng);
    R.row(j) /= R.row(j).sum();
  }
  return R;
}

/// Cluster posteriors from one VBM pass on the given responsibilities.
inline std::vector<ClusterPosterior> clusters_from(const MaskedDataset& data, const PriorSpec& priors,
                                                   const FitConfig& config, const Matrix& R) {
  return vbm_step(data, seed_latent(data, R), priors, config);
}

inline Matrix random_spd(int d, std::mt19937_64& rng, double ridge = 0.3) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return a * a.transpose() + ridge * Matrix::Identity(d, d);
}

}  // namespace fixtures
