#include "robust_smix/engine.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "robust_smix/errors.hpp"
#include "robust_smix/estep.hpp"
#include "robust_smix/mstep.hpp"

namespace robust_smix {
namespace {

constexpr double kInitSmoothing = 1e-3;
constexpr double kInactiveMass = 1e-8;
constexpr int kInactiveStreak = 3;

int argmax_row(const Matrix& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < m.cols(); ++k) {
    if (m(row, k) > m(row, best)) best = k;
  }
  return static_cast<int>(best);
}

void require_dim(const FitResult& model, const MaskedDataset& data) {
  if (model.clusters.empty()) throw ConfigError("model has no clusters");
  if (model.clusters.front().dim() != data.dim()) {
    throw ConfigError(fmt::format("data has {} features, model expects {}", data.dim(), model.clusters.front().dim()));
  }
}

}  // namespace

Matrix mean_imputed(const MaskedDataset& data) {
  Matrix x = data.values();
  for (Eigen::Index c = 0; c < data.dim(); ++c) {
    double sum = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      if (data.observed(j, c)) {
        sum += x(j, c);
        ++n;
      }
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      if (!data.observed(j, c)) x(j, c) = mean;
    }
  }
  return x;
}

std::vector<int> kmeans(const Matrix& x, int K, std::uint64_t seed, int lloyd_steps) {
  const Eigen::Index J = x.rows();
  if (K < 1 || K > J) throw ConfigError(fmt::format("kmeans: K = {} with {} rows", K, J));
  std::mt19937_64 rng(seed);
  Matrix centers(K, x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, J - 1);
  centers.row(0) = x.row(first(rng));
  // Greedy variant: draw a few D^2-weighted candidates per step and keep the one
  // that lowers the potential most, which rarely lands on an isolated outlier.
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(K)));
  std::vector<double> d2(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) d2[static_cast<std::size_t>(j)] = (x.row(j) - centers.row(0)).squaredNorm();
  std::vector<double> trial(static_cast<std::size_t>(J)), best_d2;
  for (int k = 1; k < K; ++k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> dist(d2.begin(), d2.end());
      double best_pot = std::numeric_limits<double>::infinity();
      for (int t = 0; t < trials; ++t) {
        const Eigen::Index c = dist(rng);
        double pot = 0.0;
        for (Eigen::Index j = 0; j < J; ++j) {
          const auto i = static_cast<std::size_t>(j);
          trial[i] = std::min(d2[i], (x.row(j) - x.row(c)).squaredNorm());
          pot += trial[i];
        }
        if (pot < best_pot) {
          best_pot = pot;
          pick = c;
          best_d2 = trial;
        }
      }
      d2 = best_d2;
    } else {
      pick = first(rng);
    }
    centers.row(k) = x.row(pick);
  }

  std::vector<int> labels(static_cast<std::size_t>(J), 0);
  auto assign = [&] {
    for (Eigen::Index j = 0; j < J; ++j) {
      int best = 0;
      double best_d = (x.row(j) - centers.row(0)).squaredNorm();
      for (int k = 1; k < K; ++k) {
        const double dk = (x.row(j) - centers.row(k)).squaredNorm();
        if (dk < best_d) {
          best_d = dk;
          best = k;
        }
      }
      labels[static_cast<std::size_t>(j)] = best;
    }
  };
  assign();
  for (int step = 0; step < lloyd_steps; ++step) {
    Matrix sums = Matrix::Zero(K, x.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
    for (Eigen::Index j = 0; j < J; ++j) {
      sums.row(labels[static_cast<std::size_t>(j)]) += x.row(j);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
    }
    for (int k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        centers.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
      }
    }
    const std::vector<int> before = labels;
    assign();
    if (labels == before) break;
  }
  return labels;
}

LatentPosterior seed_latent(const MaskedDataset& data, const Matrix& responsibilities) {
  const Eigen::Index J = data.rows();
  const Eigen::Index K = responsibilities.cols();
  if (responsibilities.rows() != J) throw ConfigError("seed_latent: responsibility rows do not match data");
  LatentPosterior lp;
  lp.responsibilities = responsibilities;
  lp.log_rho = responsibilities.array().log().matrix();
  lp.scale_shape = Matrix::Constant(J, K, std::numeric_limits<double>::infinity());
  lp.scale_rate = lp.scale_shape;
  lp.e_u = Matrix::Ones(J, K);
  lp.e_log_u = Matrix::Zero(J, K);
  lp.mahalanobis = Matrix::Zero(J, K);
  lp.completed.assign(static_cast<std::size_t>(K), mean_imputed(data));
  lp.patterns = data.patterns();
  lp.pattern_of_row.resize(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) lp.pattern_of_row[static_cast<std::size_t>(j)] = data.pattern_of(j);
  lp.missing_cov.assign(static_cast<std::size_t>(K), {});
  lp.missing_logdet.assign(static_cast<std::size_t>(K), {});
  for (Eigen::Index k = 0; k < K; ++k) {
    for (const auto& p : lp.patterns) {
      lp.missing_cov[static_cast<std::size_t>(k)].push_back(Matrix::Zero(p.missing_count(), p.missing_count()));
      lp.missing_logdet[static_cast<std::size_t>(k)].push_back(0.0);
    }
  }
  return lp;
}

std::vector<ClusterPosterior> vbm_step(const MaskedDataset& data, const LatentPosterior& latent,
                                       const PriorSpec& priors, const FitConfig& config,
                                       std::vector<Diagnostic>* diagnostics) {
  const SufficientStats stats = sufficient_stats(latent, data);
  return refresh_expectations(update_hyperparameters(stats, priors, config.scatter_mode, diagnostics), priors,
                              config.model_kind, diagnostics);
}

InitialState initialize(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config) {
  const int K = priors.K;
  const Eigen::Index J = data.rows();
  if (K > J) throw ConfigError(fmt::format("K = {} exceeds the number of rows ({})", K, J));
  Matrix R(J, K);
  if (config.init_method == InitMethod::kmeanspp) {
    const std::vector<int> labels = kmeans(mean_imputed(data), K, config.seed);
    const double norm = 1.0 + kInitSmoothing * K;
    for (Eigen::Index j = 0; j < J; ++j) {
      for (int k = 0; k < K; ++k) {
        R(j, k) = ((labels[static_cast<std::size_t>(j)] == k ? 1.0 : 0.0) + kInitSmoothing) / norm;
      }
    }
  } else {
    std::mt19937_64 rng(config.seed);
    std::gamma_distribution<double> g(1.0, 1.0);
    for (Eigen::Index j = 0; j < J; ++j) {
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        R(j, k) = g(rng);
        total += R(j, k);
      }
      R.row(j) /= total;
    }
  }
  InitialState st;
  st.latent = seed_latent(data, R);
  st.clusters = vbm_step(data, st.latent, priors, config);
  return st;
}

namespace {

FitResult run(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config,
              std::vector<ClusterPosterior> clusters, std::vector<Diagnostic> diagnostics,
              const IterationObserver& observer) {
  FitResult result;
  result.priors = priors;
  result.config = config;
  const std::size_t K = clusters.size();
  std::vector<int> low_streak(K, 0);
  std::vector<bool> active(K, true);
  auto tag = [&diagnostics](std::size_t from, int iteration) {
    for (std::size_t i = from; i < diagnostics.size(); ++i) diagnostics[i].iteration = iteration;
  };

  for (int it = 1; it <= config.max_iterations; ++it) {
    const std::size_t mark = diagnostics.size();
    const LatentPosterior latent = e_step(data, clusters, config);
    std::vector<ClusterPosterior> next = vbm_step(data, latent, priors, config, &diagnostics);
    tag(mark, it);

    for (std::size_t k = 0; k < K; ++k) {
      const double mass = latent.responsibilities.col(static_cast<Eigen::Index>(k)).sum();
      low_streak[k] = mass < kInactiveMass ? low_streak[k] + 1 : 0;
      if (active[k] && low_streak[k] >= kInactiveStreak) {
        active[k] = false;
        diagnostics.push_back({"inactive_cluster", it,
                               fmt::format("cluster {}: effective count below {} for {} iterations", k,
                                           kInactiveMass, kInactiveStreak)});
      }
      next[k].active = active[k];
    }
    clusters = std::move(next);

    const ElboBreakdown elbo = compute_elbo(data, clusters, latent, priors, config);
    for (const auto& name : elbo.non_finite()) {
      diagnostics.push_back({"elbo_non_finite", it, "non-finite bound subtotal: " + name});
    }
    result.elbo_trace.push_back({it, elbo.total});
    const auto [converged, violation] = check_convergence(result.elbo_trace, config);
    if (violation) diagnostics.push_back(*violation);
    if (observer) observer(it, clusters, latent, elbo);
    if (converged) {
      result.converged = true;
      break;
    }
  }

  result.latent = e_step(data, clusters, config);
  result.clusters = std::move(clusters);
  result.diagnostics = std::move(diagnostics);
  return result;
}

void check_inputs(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config) {
  data.require_fit_ready();
  validate(priors, data);
  validate(config, priors.K);
  if (priors.K > data.rows()) {
    throw ConfigError(fmt::format("K = {} exceeds the number of rows ({})", priors.K, data.rows()));
  }
}

}  // namespace

FitResult fit(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config,
              const IterationObserver& observer) {
  check_inputs(data, priors, config);
  std::vector<Diagnostic> diagnostics;
  InitialState init = initialize(data, priors, config);
  return run(data, priors, config, std::move(init.clusters), std::move(diagnostics), observer);
}

FitResult fit_from(const MaskedDataset& data, const PriorSpec& priors, const FitConfig& config,
                   const LatentPosterior& initial, const IterationObserver& observer) {
  check_inputs(data, priors, config);
  if (initial.clusters() != priors.K) throw ConfigError("initial latent posterior has the wrong cluster count");
  std::vector<Diagnostic> diagnostics;
  std::vector<ClusterPosterior> clusters = vbm_step(data, initial, priors, config, &diagnostics);
  return run(data, priors, config, std::move(clusters), std::move(diagnostics), observer);
}

PredictionResult predict(const FitResult& model, const MaskedDataset& data) {
  require_dim(model, data);
  const LatentPosterior lp = e_step(data, model.clusters, model.config);
  PredictionResult out;
  out.responsibilities = lp.responsibilities;
  out.labels.resize(static_cast<std::size_t>(data.rows()));
  out.outlier_score.resize(data.rows());
  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    const int k = argmax_row(lp.responsibilities, j);
    out.labels[static_cast<std::size_t>(j)] = k;
    out.outlier_score(j) = lp.e_u(j, k);
  }
  return out;
}

ImputationResult impute(const FitResult& model, const MaskedDataset& data) {
  require_dim(model, data);
  const LatentPosterior lp = e_step(data, model.clusters, model.config);
  const bool student = model.config.model_kind == ModelKind::student;
  const Eigen::Index K = lp.clusters();
  ImputationResult out;
  out.completed = data.values();
  out.stddev = Matrix::Zero(data.rows(), data.dim());
  const double inf = std::numeric_limits<double>::infinity();

  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    const std::size_t p = lp.pattern_of_row[static_cast<std::size_t>(j)];
    const MaskPattern& pat = lp.patterns[p];
    if (pat.missing_index.empty()) continue;
    bool undefined = false;
    for (std::size_t t = 0; t < pat.missing_index.size(); ++t) {
      const Eigen::Index c = pat.missing_index[t];
      const auto tt = static_cast<Eigen::Index>(t);
      double mean = 0.0, second = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        const double r = lp.responsibilities(j, k);
        const double m = lp.completed[static_cast<std::size_t>(k)](j, c);
        double v = lp.missing_cov[static_cast<std::size_t>(k)][p](tt, tt);
        if (student) {
          const double a = lp.scale_shape(j, k);
          if (a <= 1.0) {
            if (r >= 1e-12) undefined = true;
            v = 0.0;
          } else {
            v *= lp.scale_rate(j, k) / (a - 1.0);
          }
        }
        mean += r * m;
        second += r * (v + m * m);
      }
      out.completed(j, c) = mean;
      out.stddev(j, c) = undefined ? inf : std::sqrt(std::max(second - mean * mean, 0.0));
    }
    if (undefined) {
      out.diagnostics.push_back({"imputation_variance", 0,
                                 fmt::format("row {}: scale posterior shape <= 1, variance undefined", j)});
    }
  }
  return out;
}

}  // namespace robust_smix
