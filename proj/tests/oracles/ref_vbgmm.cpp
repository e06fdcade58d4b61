#include "ref_vbgmm.hpp"

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const double kPi = 3.14159265358979323846;

double logdet(const MatrixXd& A) {
  Eigen::LLT<MatrixXd> llt(A);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double e_log_det_lambda(const RefComponent& c) {
  const int D = static_cast<int>(c.m.size());
  double v = D * std::log(2.0) + logdet(c.W);
  for (int i = 1; i <= D; ++i) v += boost::math::digamma(0.5 * (c.nu + 1 - i));
  return v;
}

double log_b(const MatrixXd& W, double nu) {
  const int D = static_cast<int>(W.rows());
  double v = -0.5 * nu * logdet(W) - 0.5 * nu * D * std::log(2.0) - 0.25 * D * (D - 1) * std::log(kPi);
  for (int i = 1; i <= D; ++i) v -= boost::math::lgamma(0.5 * (nu + 1 - i));
  return v;
}

double log_c(const std::vector<double>& a) {
  double s = 0.0, l = 0.0;
  for (double x : a) {
    s += x;
    l += boost::math::lgamma(x);
  }
  return boost::math::lgamma(s) - l;
}

struct Moments {
  double N;
  VectorXd xbar;
  MatrixXd S;
};

Moments moments(const MatrixXd& X, const MatrixXd& R, int k) {
  const int D = static_cast<int>(X.cols());
  Moments m{R.col(k).sum(), VectorXd::Zero(D), MatrixXd::Zero(D, D)};
  if (m.N <= 0.0) return m;
  for (int n = 0; n < X.rows(); ++n) m.xbar += R(n, k) * X.row(n).transpose();
  m.xbar /= m.N;
  for (int n = 0; n < X.rows(); ++n) {
    const VectorXd d = X.row(n).transpose() - m.xbar;
    m.S += R(n, k) * d * d.transpose();
  }
  m.S /= m.N;
  return m;
}

}  // namespace

std::vector<RefComponent> m_step(const MatrixXd& X, const MatrixXd& R, const RefPrior& p) {
  std::vector<RefComponent> out;
  const MatrixXd W0inv = p.W0.inverse();
  for (int k = 0; k < R.cols(); ++k) {
    const Moments mo = moments(X, R, k);
    RefComponent c;
    c.alpha = p.alpha0 + mo.N;
    c.beta = p.beta0 + mo.N;
    c.nu = p.nu0 + mo.N;
    c.m = (p.beta0 * p.m0 + mo.N * mo.xbar) / c.beta;
    const VectorXd dx = mo.xbar - p.m0;
    MatrixXd Winv = W0inv + mo.N * mo.S + (p.beta0 * mo.N / (p.beta0 + mo.N)) * dx * dx.transpose();
    Winv = 0.5 * (Winv + Winv.transpose());
    c.W = Winv.inverse();
    c.W = 0.5 * (c.W + c.W.transpose());
    out.push_back(c);
  }
  return out;
}

MatrixXd e_step(const MatrixXd& X, const std::vector<RefComponent>& comps, MatrixXd* log_rho) {
  const int N = static_cast<int>(X.rows());
  const int K = static_cast<int>(comps.size());
  const int D = static_cast<int>(X.cols());
  double alpha_sum = 0.0;
  for (const auto& c : comps) alpha_sum += c.alpha;
  MatrixXd L(N, K);
  for (int k = 0; k < K; ++k) {
    const auto& c = comps[k];
    const double e_ln_pi = boost::math::digamma(c.alpha) - boost::math::digamma(alpha_sum);
    const double e_ln_lambda = e_log_det_lambda(c);
    for (int n = 0; n < N; ++n) {
      const VectorXd d = X.row(n).transpose() - c.m;
      const double quad = D / c.beta + c.nu * d.dot(c.W * d);
      L(n, k) = e_ln_pi + 0.5 * e_ln_lambda - 0.5 * D * std::log(2.0 * kPi) - 0.5 * quad;
    }
  }
  if (log_rho) *log_rho = L;
  MatrixXd R(N, K);
  for (int n = 0; n < N; ++n) {
    const double mx = L.row(n).maxCoeff();
    const double s = (L.row(n).array() - mx).exp().sum();
    for (int k = 0; k < K; ++k) R(n, k) = std::exp(L(n, k) - mx) / s;
  }
  return R;
}

double lower_bound(const MatrixXd& X, const MatrixXd& R, const std::vector<RefComponent>& comps, const RefPrior& p) {
  const int K = static_cast<int>(comps.size());
  const int D = static_cast<int>(X.cols());
  const MatrixXd W0inv = p.W0.inverse();
  double alpha_sum = 0.0;
  for (const auto& c : comps) alpha_sum += c.alpha;

  double e_px = 0.0, e_pz = 0.0, e_ppi = 0.0, e_pml = 0.0, e_qz = 0.0, e_qpi = 0.0, e_qml = 0.0;
  std::vector<double> alphas;
  for (int k = 0; k < K; ++k) {
    const auto& c = comps[k];
    const Moments mo = moments(X, R, k);
    const double ln_pi = boost::math::digamma(c.alpha) - boost::math::digamma(alpha_sum);
    const double ln_lam = e_log_det_lambda(c);
    const VectorXd dx = mo.xbar - c.m;
    e_px += 0.5 * mo.N *
            (ln_lam - D / c.beta - c.nu * (mo.S * c.W).trace() - c.nu * dx.dot(c.W * dx) - D * std::log(2 * kPi));
    for (int n = 0; n < X.rows(); ++n) {
      e_pz += R(n, k) * ln_pi;
      if (R(n, k) > 0) e_qz += R(n, k) * std::log(R(n, k));
    }
    e_ppi += (p.alpha0 - 1.0) * ln_pi;
    e_qpi += (c.alpha - 1.0) * ln_pi;
    alphas.push_back(c.alpha);
    const VectorXd dm = c.m - p.m0;
    e_pml += 0.5 * (D * std::log(p.beta0 / (2 * kPi)) + ln_lam - D * p.beta0 / c.beta -
                    p.beta0 * c.nu * dm.dot(c.W * dm)) +
             0.5 * (p.nu0 - D - 1) * ln_lam - 0.5 * c.nu * (W0inv * c.W).trace();
    const double entropy_lambda = -log_b(c.W, c.nu) - 0.5 * (c.nu - D - 1) * ln_lam + 0.5 * c.nu * D;
    e_qml += 0.5 * ln_lam + 0.5 * D * std::log(c.beta / (2 * kPi)) - 0.5 * D - entropy_lambda;
  }
  e_ppi += log_c(std::vector<double>(K, p.alpha0));
  e_qpi += log_c(alphas);
  e_pml += K * log_b(p.W0, p.nu0);
  return e_px + e_pz + e_ppi + e_pml - e_qz - e_qpi - e_qml;
}

}  // namespace oracle
