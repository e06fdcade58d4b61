#include "robust_smix/elbo.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "robust_smix/alpha_beta.hpp"
#include "robust_smix/errors.hpp"

namespace robust_smix {

std::vector<std::string> ElboBreakdown::non_finite() const {
  std::vector<std::string> out;
  const std::pair<const char*, double> parts[] = {
      {"data", data},         {"label", label},       {"scale", scale},
      {"missing", missing},   {"weights", weights},   {"mean_cov", mean_cov},
      {"alpha_beta", alpha_beta}, {"expected_log_joint", expected_log_joint},
      {"entropy_term", entropy_term}};
  for (const auto& [name, v] : parts) {
    if (!std::isfinite(v)) out.emplace_back(name);
  }
  return out;
}

double log_dirichlet_norm(const std::vector<double>& kappa) {
  double sum = 0.0, lg = 0.0;
  for (double k : kappa) {
    sum += k;
    lg += log_gamma(k);
  }
  return log_gamma(sum) - lg;
}

double log_inverse_wishart_norm(double gamma, const SpdMatrix& S) {
  const auto d = static_cast<double>(S.dim());
  return 0.5 * gamma * S.logdet() - 0.5 * gamma * d * std::log(2.0) -
         multivariate_log_gamma(static_cast<int>(S.dim()), 0.5 * gamma);
}

ElboBreakdown compute_elbo(const MaskedDataset& data, const std::vector<ClusterPosterior>& clusters,
                           const LatentPosterior& latent, const PriorSpec& priors, const FitConfig& config) {
  const Eigen::Index J = data.rows();
  const auto K = static_cast<Eigen::Index>(clusters.size());
  const Eigen::Index d = data.dim();
  const double dd = static_cast<double>(d);
  const bool student = config.model_kind == ModelKind::student;
  if (J > 0 && (latent.rows() != J || latent.clusters() != K)) {
    throw DomainError("compute_elbo: latent posterior shape does not match");
  }

  // Log-joint and log-q halves are accumulated separately.
  // The latent posterior may predate `clusters` (the bound is evaluated after
  // the VBM step), so the expected quadratic form is recomputed here from the
  // stored x~ and Delta rather than read from latent.mahalanobis.
  double p_x = 0.0, p_z = 0.0, p_u = 0.0;
  double q_z = 0.0, q_u = 0.0, q_xm = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const ClusterPosterior& c = clusters[ks];
    const Matrix precision = c.Sigma.inverse();
    // gamma * tr((Sigma^{-1})_mm Delta_miss) per pattern
    std::vector<double> miss_trace(latent.patterns.size(), 0.0);
    for (std::size_t p = 0; p < latent.patterns.size(); ++p) {
      const auto& mi = latent.patterns[p].missing_index;
      const Matrix& delta = latent.missing_cov[ks][p];
      double t = 0.0;
      for (std::size_t a = 0; a < mi.size(); ++a) {
        for (std::size_t b = 0; b < mi.size(); ++b) {
          t += precision(mi[a], mi[b]) * delta(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
        }
      }
      miss_trace[p] = c.gamma * t;
    }
    for (Eigen::Index j = 0; j < J; ++j) {
      const double r = latent.responsibilities(j, k);
      if (r == 0.0) continue;
      const std::size_t p = latent.pattern_of_row[static_cast<std::size_t>(j)];
      const double dm = static_cast<double>(latent.patterns[p].missing_count());
      const double eu = latent.e_u(j, k);
      const double elu = latent.e_log_u(j, k);
      const double logdet_m = latent.missing_logdet[ks][p];
      const Vector diff = latent.completed[ks].row(j).transpose() - c.mu;
      const double quad = c.gamma * c.Sigma.inverse_quadratic(diff) + dd / c.eta;

      p_x += r * (-0.5 * dd * kLogTwoPi + 0.5 * dd * elu - 0.5 * c.e_logdet_cov - 0.5 * (eu * quad + miss_trace[p]));
      p_z += r * c.e_log_weight;
      q_z += r * std::log(r);
      q_xm += r * (-0.5 * dm * (1.0 + kLogTwoPi) - 0.5 * logdet_m + 0.5 * dm * elu);
      if (student) {
        const double a = latent.scale_shape(j, k);
        const double b = latent.scale_rate(j, k);
        p_u += r * (c.e_alpha * c.e_log_beta - c.e_log_gamma_alpha + (c.e_alpha - 1.0) * elu - c.e_beta * eu);
        q_u += r * (a * std::log(b) - log_gamma(a) + (a - 1.0) * elu - b * eu);
      }
    }
  }

  // Parameter blocks.
  std::vector<double> kappa0(static_cast<std::size_t>(K), priors.kappa0), kappa;
  double p_a = log_dirichlet_norm(kappa0);
  double q_a = 0.0;
  for (const auto& c : clusters) kappa.push_back(c.kappa);
  q_a = log_dirichlet_norm(kappa);
  for (const auto& c : clusters) {
    p_a += (priors.kappa0 - 1.0) * c.e_log_weight;
    q_a += (c.kappa - 1.0) * c.e_log_weight;
  }

  const SpdMatrix Sigma0 = SpdMatrix::from(priors.Sigma0);
  const double c_iw0 = log_inverse_wishart_norm(priors.gamma0, Sigma0);
  double p_ms = 0.0, q_ms = 0.0;
  for (const auto& c : clusters) {
    const Vector dmu = c.mu - priors.mu0;
    const double quad = c.gamma * c.Sigma.inverse_quadratic(dmu) + dd / c.eta;
    p_ms += -0.5 * dd * kLogTwoPi + 0.5 * dd * std::log(priors.eta0) - 0.5 * c.e_logdet_cov - 0.5 * priors.eta0 * quad +
            c_iw0 - 0.5 * (priors.gamma0 + dd + 1.0) * c.e_logdet_cov -
            0.5 * c.gamma * c.Sigma.trace_inverse_product(priors.Sigma0);
    q_ms += -0.5 * dd * kLogTwoPi + 0.5 * dd * std::log(c.eta) - 0.5 * c.e_logdet_cov - 0.5 * dd +
            log_inverse_wishart_norm(c.gamma, c.Sigma) - 0.5 * (c.gamma + dd + 1.0) * c.e_logdet_cov -
            0.5 * c.gamma * dd;
  }

  double p_ab = 0.0, q_ab = 0.0;
  if (student && K > 0) {
    const AlphaDensityParams prior_ab{std::log(priors.p0), priors.q0, priors.s0, priors.r0};
    const double log_m0 =
        laplace_log_integral([&prior_ab](double a) { return log_density_derivs(a, prior_ab); }).log_value;
    const double log_p0 = std::log(priors.p0);
    for (const auto& c : clusters) {
      const double ea_elb = c.e_alpha * c.e_log_beta;
      p_ab += -log_m0 + (c.e_alpha - 1.0) * log_p0 + priors.s0 * ea_elb - priors.q0 * c.e_beta -
              priors.r0 * c.e_log_gamma_alpha;
      q_ab += -c.log_normalizer + (c.e_alpha - 1.0) * c.log_p + c.s * ea_elb - c.q * c.e_beta -
              c.r * c.e_log_gamma_alpha;
    }
  }

  ElboBreakdown e;
  e.data = p_x;
  e.label = p_z - q_z;
  e.scale = p_u - q_u;
  e.missing = -q_xm;
  e.weights = p_a - q_a;
  e.mean_cov = p_ms - q_ms;
  e.alpha_beta = p_ab - q_ab;
  e.expected_log_joint = p_x + p_z + p_u + p_a + p_ms + p_ab;
  e.entropy_term = q_z + q_u + q_xm + q_a + q_ms + q_ab;
  e.total = e.expected_log_joint - e.entropy_term;
  return e;
}

std::pair<bool, std::optional<Diagnostic>> check_convergence(const std::vector<TracePoint>& trace,
                                                             const FitConfig& config) {
  if (trace.size() < 2) return {false, std::nullopt};
  const TracePoint& cur = trace.back();
  const double prev = trace[trace.size() - 2].elbo;
  const double scale = 1.0 + std::fabs(cur.elbo);
  std::optional<Diagnostic> violation;
  if (cur.elbo < prev - 1e-6 * scale) {
    violation = Diagnostic{"elbo_decrease", cur.iteration,
                           fmt::format("bound decreased by {:.6g} (from {:.17g} to {:.17g})", prev - cur.elbo, prev,
                                       cur.elbo)};
  }
  const bool converged = std::fabs(cur.elbo - prev) <= config.elbo_rel_tolerance * scale;
  return {converged, violation};
}

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iteration,elbo\n";
  for (const auto& t : trace) out << fmt::format("{},{:.17g}\n", t.iteration, t.elbo);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace robust_smix
