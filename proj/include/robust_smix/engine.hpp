#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "robust_smix/elbo.hpp"
#include "robust_smix/model.hpp"

namespace robust_smix {

struct PredictionResult {
  std::vector<int> labels;    // argmax, ties to the smallest index
  Matrix responsibilities;    // J x K
  Vector outlier_score;       // E[u_j | z_j = label]; low means outlier
};

struct ImputationResult {
  Matrix completed;  // observed cells copied through
  Matrix stddev;     // posterior std of imputed cells, 0 for observed, +inf when undefined
  std::vector<Diagnostic> diagnostics;
};

struct InitialState {
  std::vector<ClusterPosterior> clusters;  // after one VBM pass
  LatentPosterior latent;                  // the responsibilities that pass used
};

/// Latent posterior holding hard or soft responsibilities on mean-imputed
/// data, with E[u] = 1 and no missing-value spread. Used to seed a fit.
LatentPosterior seed_latent(const MaskedDataset& data, const Matrix& responsibilities);

/// Mean-imputed copy of the data (each missing cell gets its feature's observed mean).
Matrix mean_imputed(const MaskedDataset& data);

/// k-means++ seeding plus `lloyd_steps` Lloyd iterations; returns hard labels.
std::vector<int> kmeans(const Matrix& x, int K, std::uint64_t seed, int lloyd_steps = 10);

/// sufficient_stats, update_hyperparameters and refresh_expectations.
std::vector<ClusterPosterior> vbm_step(const MaskedDataset& data, const LatentPosterior& latent,
                                       const PriorSpec& priors, const FitConfig& config,
                                       std::vector<Diagnostic>* diagnostics = nullptr);

InitialState initialize(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config);

using IterationObserver = std::function<void(int iteration, const std::vector<ClusterPosterior>& clusters,
                                             const LatentPosterior& latent, const ElboBreakdown& elbo)>;

FitResult fit(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config,
              const IterationObserver& observer = {});

/// Fit starting from the VBM pass on `initial` instead of the configured
/// initializer.
FitResult fit_from(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config,
                   const LatentPosterior& initial, const IterationObserver& observer = {});

PredictionResult predict(const FitResult& model, const MaskedDataset& data);
ImputationResult impute(const FitResult& model, const MaskedDataset& data);

}  // namespace robust_smix
