#include "robust_smix/estep.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "robust_smix/errors.hpp"
#include "robust_smix/parallel.hpp"

namespace robust_smix {

std::vector<ClusterReadView> build_read_views(const std::vector<ClusterPosterior>& clusters,
                                              const std::vector<MaskPattern>& patterns,
                                              MarginalMode mode) {
  std::vector<ClusterReadView> views(clusters.size());
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    views[k].cluster = &clusters[k];
    views[k].patterns.reserve(patterns.size());
    for (const MaskPattern& p : patterns) {
      views[k].patterns.push_back(PatternConditional::build(
          partition(clusters[k].mu, clusters[k].Sigma.matrix(), p.observed), clusters[k].gamma, mode, k));
    }
  }
  return views;
}

double expected_mahalanobis(const Vector& x_obs, const Vector& mu_obs, const SpdMatrix& delta_obs,
                            double eta, Eigen::Index trace_dim) {
  if (x_obs.size() != mu_obs.size() || delta_obs.dim() != x_obs.size()) {
    throw DomainError("expected_mahalanobis: shape mismatch");
  }
  const double quad = x_obs.size() > 0 ? delta_obs.inverse_quadratic(x_obs - mu_obs) : 0.0;
  return quad + static_cast<double>(trace_dim) / eta;
}

ScalePosterior scale_posterior(double maha, const ClusterPosterior& cluster, Eigen::Index d_obs) {
  ScalePosterior sp;
  sp.shape = cluster.e_alpha + 0.5 * static_cast<double>(d_obs);
  sp.rate = 0.5 * maha + cluster.e_beta;
  sp.e_u = sp.shape / sp.rate;
  sp.e_log_u = digamma(sp.shape) - std::log(sp.rate);
  return sp;
}

double log_responsibility(double maha, const ClusterPosterior& c, Eigen::Index d_obs,
                          double logdet_delta_miss, ModelKind kind) {
  const double half_obs = 0.5 * static_cast<double>(d_obs);
  const double common = c.e_log_weight - 0.5 * (c.e_logdet_cov - logdet_delta_miss) - half_obs * kLogTwoPi;
  if (kind == ModelKind::gaussian) return common - 0.5 * maha;
  const double shape = c.e_alpha + half_obs;
  return common + c.e_alpha * c.e_log_beta - c.e_log_gamma_alpha + log_gamma(shape) -
         shape * std::log(c.e_beta) - shape * std::log1p(maha / (2.0 * c.e_beta));
}

std::vector<double> normalize_responsibilities(std::span<const double> log_weights, double floor,
                                               Eigen::Index row) {
  double lse = 0.0;
  try {
    lse = log_sum_exp(log_weights);
  } catch (const DegenerateError&) {
    throw DegenerateError("row " + std::to_string(row) + ": every log responsibility is -inf");
  }
  std::vector<double> r(log_weights.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::exp(log_weights[k] - lse);
  if (floor > 0.0) {
    double total = 0.0;
    for (double& v : r) {
      v = std::max(v, floor);
      total += v;
    }
    for (double& v : r) v /= total;
  }
  return r;
}

LatentPosterior e_step(const MaskedDataset& data, const std::vector<ClusterReadView>& views,
                       const FitConfig& config) {
  const Eigen::Index J = data.rows();
  const Eigen::Index d = data.dim();
  const auto K = static_cast<Eigen::Index>(views.size());
  const bool gaussian = config.model_kind == ModelKind::gaussian;

  LatentPosterior lp;
  lp.responsibilities.resize(J, K);
  lp.log_rho.resize(J, K);
  lp.scale_shape.resize(J, K);
  lp.scale_rate.resize(J, K);
  lp.e_u.resize(J, K);
  lp.e_log_u.resize(J, K);
  lp.mahalanobis.resize(J, K);
  lp.completed.assign(static_cast<std::size_t>(K), Matrix(J, d));
  lp.patterns = data.patterns();
  lp.pattern_of_row.resize(static_cast<std::size_t>(J));
  lp.missing_cov.resize(static_cast<std::size_t>(K));
  lp.missing_logdet.resize(static_cast<std::size_t>(K));
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (const auto& pc : views[k].patterns) {
      lp.missing_cov[k].push_back(pc.delta_miss().matrix());
      lp.missing_logdet[k].push_back(pc.logdet_delta_miss());
    }
  }

  const double infinity = std::numeric_limits<double>::infinity();
  parallel_for(static_cast<std::size_t>(J), resolve_workers(config.threads), [&](std::size_t row) {
    const auto j = static_cast<Eigen::Index>(row);
    const std::size_t p = data.pattern_of(j);
    lp.pattern_of_row[row] = p;
    const MaskPattern& pattern = data.patterns()[p];
    const Vector x_obs = data.observed_values(j);
    const Eigen::Index d_obs = pattern.observed_count();
    std::vector<double> log_w(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) {
      const ClusterPosterior& c = views[static_cast<std::size_t>(k)].posterior();
      const PatternConditional& pc = views[static_cast<std::size_t>(k)].patterns[p];
      const double maha = expected_mahalanobis(x_obs, pc.blocks().mu_obs, pc.delta_obs(), c.eta, d);
      lp.mahalanobis(j, k) = maha;
      if (gaussian) {
        lp.scale_shape(j, k) = infinity;
        lp.scale_rate(j, k) = infinity;
        lp.e_u(j, k) = 1.0;
        lp.e_log_u(j, k) = 0.0;
      } else {
        const ScalePosterior sp = scale_posterior(maha, c, d_obs);
        lp.scale_shape(j, k) = sp.shape;
        lp.scale_rate(j, k) = sp.rate;
        lp.e_u(j, k) = sp.e_u;
        lp.e_log_u(j, k) = sp.e_log_u;
      }
      const double lr = log_responsibility(maha, c, d_obs, pc.logdet_delta_miss(), config.model_kind);
      lp.log_rho(j, k) = lr;
      log_w[static_cast<std::size_t>(k)] = lr;

      const Vector eps = pc.conditional_mean(x_obs);
      auto row_out = lp.completed[static_cast<std::size_t>(k)].row(j);
      for (std::size_t t = 0; t < pattern.observed_index.size(); ++t) {
        row_out(pattern.observed_index[t]) = x_obs(static_cast<Eigen::Index>(t));
      }
      for (std::size_t t = 0; t < pattern.missing_index.size(); ++t) {
        row_out(pattern.missing_index[t]) = eps(static_cast<Eigen::Index>(t));
      }
    }
    const std::vector<double> r = normalize_responsibilities(log_w, config.min_responsibility_floor, j);
    for (Eigen::Index k = 0; k < K; ++k) lp.responsibilities(j, k) = r[static_cast<std::size_t>(k)];
  });
  return lp;
}

LatentPosterior e_step(const MaskedDataset& data, const std::vector<ClusterPosterior>& clusters,
                       const FitConfig& config) {
  return e_step(data, build_read_views(clusters, data.patterns(), config.marginal_mode), config);
}

}  // namespace robust_smix
