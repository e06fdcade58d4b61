#include "robust_smix/baseline.hpp"

#include <cmath>

#include <fmt/format.h>

#include "robust_smix/engine.hpp"
#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

struct Params {
  Vector weights;
  std::vector<Vector> means;
  std::vector<SpdMatrix> covs;
};

Params m_step(const Matrix& x, const Matrix& R, int& jitter_events) {
  const Eigen::Index J = x.rows(), d = x.cols(), K = R.cols();
  Params p;
  p.weights.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double n = R.col(k).sum();
    p.weights(k) = n / static_cast<double>(J);
    Vector mu = Vector::Zero(d);
    if (n > 0.0) mu = (x.transpose() * R.col(k)) / n;
    Matrix S = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < J; ++j) {
      const Vector diff = x.row(j).transpose() - mu;
      S.noalias() += R(j, k) * diff * diff.transpose();
    }
    if (n > 0.0) S /= n;
    auto f = factor_with_jitter(symmetrized(S));
    if (!f) {
      // An empty or single-point component: fall back to the pooled scale.
      Matrix pooled = Matrix::Identity(d, d) * std::max(1e-12, (x.rowwise() - x.colwise().mean()).squaredNorm() /
                                                                   static_cast<double>(J * d));
      f = factor_with_jitter(pooled);
      if (!f) throw CovarianceCollapseError(fmt::format("gmm_em: component {} covariance collapsed", k), k);
    }
    if (f->jitter > 0.0) ++jitter_events;
    p.means.push_back(mu);
    p.covs.push_back(std::move(f->value));
  }
  return p;
}

// Fills R with responsibilities and returns the log-likelihood.
double e_step(const Matrix& x, const Params& p, Matrix& R) {
  const Eigen::Index J = x.rows(), d = x.cols(), K = p.weights.size();
  R.resize(J, K);
  double ll = 0.0;
  std::vector<double> lw(static_cast<std::size_t>(K));
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Vector diff = x.row(j).transpose() - p.means[ks];
      lw[ks] = (p.weights(k) > 0.0 ? std::log(p.weights(k)) : -std::numeric_limits<double>::infinity()) -
               0.5 * (static_cast<double>(d) * kLogTwoPi + p.covs[ks].logdet() + p.covs[ks].inverse_quadratic(diff));
    }
    const double lse = log_sum_exp(lw);
    ll += lse;
    for (Eigen::Index k = 0; k < K; ++k) R(j, k) = std::exp(lw[static_cast<std::size_t>(k)] - lse);
  }
  return ll;
}

}  // namespace

GmmEmResult gmm_em_baseline(const MaskedDataset& data, int K, std::uint64_t seed, int max_iter, bool mean_impute,
                            double tol) {
  if (data.has_missing() && !mean_impute) {
    throw ConfigError("gmm_em_baseline: data has missing cells; enable mean imputation");
  }
  if (K < 1 || K > data.rows()) throw ConfigError("gmm_em_baseline: K must lie in [1, J]");
  const Matrix x = mean_imputed(data);
  const Eigen::Index J = x.rows();

  const std::vector<int> init = kmeans(x, K, seed);
  Matrix R = Matrix::Zero(J, K);
  for (Eigen::Index j = 0; j < J; ++j) R(j, init[static_cast<std::size_t>(j)]) = 1.0;

  GmmEmResult out;
  Params p = m_step(x, R, out.jitter_events);
  for (int it = 0; it < max_iter; ++it) {
    const double ll = e_step(x, p, R);
    out.loglik_trace.push_back(ll);
    const std::size_t n = out.loglik_trace.size();
    if (n >= 2 && std::fabs(ll - out.loglik_trace[n - 2]) <= tol * (1.0 + std::fabs(ll))) break;
    p = m_step(x, R, out.jitter_events);
  }

  out.responsibilities = R;
  out.labels.resize(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < K; ++k) {
      if (R(j, k) > R(j, best)) best = k;
    }
    out.labels[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  out.weights = p.weights;
  out.means = p.means;
  for (const auto& c : p.covs) out.covariances.push_back(c.matrix());
  return out;
}

}  // namespace robust_smix
