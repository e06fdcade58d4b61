#include "robust_smix/mstep.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "robust_smix/alpha_beta.hpp"
#include "robust_smix/errors.hpp"

namespace robust_smix {

SufficientStats sufficient_stats(const LatentPosterior& latent, const MaskedDataset& data) {
  const Eigen::Index J = latent.rows();
  const Eigen::Index K = latent.clusters();
  const Eigen::Index d = data.dim();
  if (data.rows() != J) throw DomainError("sufficient_stats: latent and data row counts differ");

  SufficientStats st;
  st.rows = J;
  st.pi.assign(K, 0.0);
  st.omega.assign(K, 0.0);
  st.delta.assign(K, 0.0);
  st.mu_x.assign(K, Vector::Zero(d));
  st.scatter_x.assign(K, Matrix::Zero(d, d));
  st.scatter_m.assign(K, Matrix::Zero(d, d));
  if (J == 0) return st;

  const double inv_j = 1.0 / static_cast<double>(J);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Matrix& xk = latent.completed[ks];
    double sum_r = 0.0, sum_ru = 0.0, sum_rlu = 0.0;
    Vector wsum = Vector::Zero(d);
    for (Eigen::Index j = 0; j < J; ++j) {
      const double r = latent.responsibilities(j, k);
      const double ru = r * latent.e_u(j, k);
      sum_r += r;
      sum_ru += ru;
      if (r > 0.0) sum_rlu += r * latent.e_log_u(j, k);
      wsum.noalias() += ru * xk.row(j).transpose();
    }
    st.pi[ks] = sum_r * inv_j;
    st.omega[ks] = sum_ru * inv_j;
    st.delta[ks] = sum_rlu * inv_j;
    if (sum_ru == 0.0) {
      if (sum_r > 0.0) {
        throw DegenerateError(fmt::format("cluster {}: responsibility mass {} but zero scale-weighted mass", k, sum_r));
      }
      continue;
    }
    st.mu_x[ks] = wsum / sum_ru;

    Matrix scatter = Matrix::Zero(d, d);
    Matrix miss = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < J; ++j) {
      const double r = latent.responsibilities(j, k);
      if (r == 0.0) continue;
      const Vector diff = xk.row(j).transpose() - st.mu_x[ks];
      scatter.noalias() += (r * latent.e_u(j, k)) * diff * diff.transpose();
      const std::size_t p = latent.pattern_of_row[static_cast<std::size_t>(j)];
      const MaskPattern& pat = latent.patterns[p];
      if (pat.missing_index.empty()) continue;
      const Matrix& dm = latent.missing_cov[ks][p];
      for (std::size_t a = 0; a < pat.missing_index.size(); ++a) {
        for (std::size_t b = 0; b < pat.missing_index.size(); ++b) {
          miss(pat.missing_index[a], pat.missing_index[b]) +=
              r * dm(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
      }
    }
    st.scatter_x[ks] = scatter / sum_ru;
    st.scatter_m[ks] = miss;
  }
  return st;
}

std::vector<ClusterPosterior> update_hyperparameters(const SufficientStats& stats, const PriorSpec& priors,
                                                     ScatterMode scatter, std::vector<Diagnostic>* diagnostics) {
  const double J = static_cast<double>(stats.rows);
  std::vector<ClusterPosterior> out(stats.clusters());
  for (std::size_t k = 0; k < out.size(); ++k) {
    ClusterPosterior& c = out[k];
    const double n = J * stats.pi[k];
    const double nu = J * stats.omega[k];
    c.kappa = priors.kappa0 + n;
    c.eta = priors.eta0 + nu;
    c.mu = nu > 0.0 ? Vector((priors.eta0 * priors.mu0 + nu * stats.mu_x[k]) / c.eta) : priors.mu0;
    c.gamma = priors.gamma0 + n;
    c.log_p = std::log(priors.p0) + J * stats.delta[k];
    c.q = priors.q0 + nu;
    c.s = priors.s0 + n;
    c.r = priors.r0 + n;

    Matrix S = priors.Sigma0 + stats.scatter_m[k];
    if (nu > 0.0) {
      const Vector dm = stats.mu_x[k] - priors.mu0;
      S.noalias() += (nu * priors.eta0 / c.eta) * dm * dm.transpose();
      S += (scatter == ScatterMode::unnormalized ? nu : 1.0) * stats.scatter_x[k];
    }
    auto factor = factor_with_jitter(symmetrized(S));
    if (!factor) {
      throw CovarianceCollapseError(fmt::format("cluster {}: posterior scale matrix is not positive definite", k), k);
    }
    if (factor->jitter > 0.0 && diagnostics) {
      diagnostics->push_back({"jitter", 0, fmt::format("cluster {}: added {:.3g} to the scale matrix diagonal", k, factor->jitter)});
    }
    c.Sigma = std::move(factor->value);
  }
  return out;
}

double expected_logdet_cov(double gamma, const SpdMatrix& Sigma) {
  const Eigen::Index d = Sigma.dim();
  double v = Sigma.logdet() - static_cast<double>(d) * std::log(2.0);
  for (Eigen::Index i = 1; i <= d; ++i) v -= digamma(0.5 * (gamma + 1.0 - static_cast<double>(i)));
  return v;
}

std::vector<ClusterPosterior> refresh_expectations(std::vector<ClusterPosterior> clusters, const PriorSpec&,
                                                   ModelKind kind, std::vector<Diagnostic>* diagnostics) {
  double kappa_sum = 0.0;
  for (const auto& c : clusters) kappa_sum += c.kappa;
  const double psi_sum = digamma(kappa_sum);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    ClusterPosterior& c = clusters[k];
    c.e_log_weight = digamma(c.kappa) - psi_sum;
    c.e_logdet_cov = expected_logdet_cov(c.gamma, c.Sigma);
    if (kind == ModelKind::gaussian) {
      c.e_alpha = 1.0;
      c.e_log_gamma_alpha = 0.0;
      c.e_psi = 0.0;
      c.e_beta = 1.0;
      c.e_log_beta = 0.0;
      c.log_normalizer = 0.0;
      continue;
    }
    const AlphaDensityParams params{c.log_p, c.q, c.s, c.r};
    AlphaExpectations ae;
    try {
      ae = posterior_expectations(params);
    } catch (const LaplaceError& e) {
      throw LaplaceError(fmt::format("cluster {}: {}", k, e.what()));
    }
    c.e_alpha = ae.e_alpha;
    c.e_log_gamma_alpha = ae.e_log_gamma_alpha;
    c.e_psi = ae.e_psi;
    c.log_normalizer = ae.log_normalizer;
    const BetaExpectations be = beta_expectations(params, ae.e_alpha, ae.e_psi);
    c.e_beta = be.e_beta;
    c.e_log_beta = be.e_log_beta;
    if (diagnostics) {
      for (const auto& note : ae.notes) diagnostics->push_back({"laplace", 0, fmt::format("cluster {}: {}", k, note)});
    }
    if (!(c.e_alpha > 0.0) || !(c.e_beta > 0.0) || !std::isfinite(c.e_log_gamma_alpha) || !std::isfinite(c.e_log_beta)) {
      throw LaplaceError(fmt::format("cluster {}: non-finite or non-positive (alpha, beta) expectations", k));
    }
  }
  return clusters;
}

}  // namespace robust_smix
