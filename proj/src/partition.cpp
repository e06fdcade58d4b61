#include "robust_smix/partition.hpp"

#include <string>

#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

Matrix select(const Matrix& m, const std::vector<Eigen::Index>& rows,
              const std::vector<Eigen::Index>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(rows[a], cols[b]);
    }
  }
  return out;
}

Vector select(const Vector& v, const std::vector<Eigen::Index>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out(static_cast<Eigen::Index>(a)) = v(idx[a]);
  return out;
}

SpdMatrix factor_block(Matrix m, const char* what, std::size_t cluster) {
  try {
    return SpdMatrix::from(symmetrized(m));
  } catch (const FactorizationError& e) {
    throw SingularBlockError(std::string(what) + " of cluster " + std::to_string(cluster) +
                                 " is singular: " + e.what(),
                             cluster);
  }
}

}  // namespace

GaussianBlocks partition(const Vector& mu, const Matrix& Sigma, const std::vector<bool>& observed) {
  if (static_cast<Eigen::Index>(observed.size()) != mu.size() || Sigma.rows() != mu.size() ||
      Sigma.cols() != mu.size()) {
    throw DomainError("partition: mask, mean and covariance sizes differ");
  }
  GaussianBlocks b;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    (observed[i] ? b.observed_index : b.missing_index).push_back(static_cast<Eigen::Index>(i));
  }
  b.mu_obs = select(mu, b.observed_index);
  b.mu_miss = select(mu, b.missing_index);
  b.Sigma_obs = select(Sigma, b.observed_index, b.observed_index);
  b.Sigma_miss = select(Sigma, b.missing_index, b.missing_index);
  b.Sigma_cov = select(Sigma, b.missing_index, b.observed_index);
  return b;
}

std::pair<Vector, Matrix> reassemble(const GaussianBlocks& b) {
  const Eigen::Index d = b.dim();
  Vector mu(d);
  Matrix Sigma(d, d);
  const auto& o = b.observed_index;
  const auto& m = b.missing_index;
  for (std::size_t a = 0; a < o.size(); ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    mu(o[a]) = b.mu_obs(ia);
    for (std::size_t c = 0; c < o.size(); ++c) Sigma(o[a], o[c]) = b.Sigma_obs(ia, static_cast<Eigen::Index>(c));
  }
  for (std::size_t a = 0; a < m.size(); ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    mu(m[a]) = b.mu_miss(ia);
    for (std::size_t c = 0; c < m.size(); ++c) Sigma(m[a], m[c]) = b.Sigma_miss(ia, static_cast<Eigen::Index>(c));
    for (std::size_t c = 0; c < o.size(); ++c) {
      Sigma(m[a], o[c]) = b.Sigma_cov(ia, static_cast<Eigen::Index>(c));
      Sigma(o[c], m[a]) = b.Sigma_cov(ia, static_cast<Eigen::Index>(c));
    }
  }
  return {mu, Sigma};
}

PatternConditional PatternConditional::build(GaussianBlocks blocks, double gamma, MarginalMode mode,
                                             std::size_t cluster) {
  if (!(gamma > 0.0)) throw DomainError("conditional_moments: gamma must be positive");
  PatternConditional pc;
  const Eigen::Index d_obs = static_cast<Eigen::Index>(blocks.observed_index.size());
  const Eigen::Index d_miss = static_cast<Eigen::Index>(blocks.missing_index.size());

  SpdMatrix obs_factor;
  if (d_obs > 0) obs_factor = factor_block(blocks.Sigma_obs, "observed covariance block", cluster);

  Matrix schur = blocks.Sigma_miss;
  if (d_miss > 0 && d_obs > 0) {
    // Sigma_obs^{-1} Sigma_cov'  (d_obs x d_miss)
    const Matrix solved = obs_factor.solve(Matrix(blocks.Sigma_cov.transpose()));
    pc.regression_ = solved.transpose();
    schur -= blocks.Sigma_cov * solved;
  } else {
    pc.regression_ = Matrix::Zero(d_miss, d_obs);
  }

  if (d_miss > 0) {
    const SpdMatrix schur_factor = factor_block(schur, "conditional covariance", cluster);
    pc.delta_miss_ = factor_block(schur / gamma, "conditional covariance", cluster);
    pc.logdet_delta_miss_ = pc.delta_miss_.logdet();

    if (d_obs > 0) {
      if (mode == MarginalMode::consistent) {
        pc.delta_obs_ = factor_block(blocks.Sigma_obs / gamma, "observed covariance block", cluster);
      } else {
        // Sigma_obs^{-1} Sigma_cov' S^{-1} Sigma_cov Sigma_obs^{-1} = R' S^{-1} R
        const Matrix precision =
            obs_factor.inverse() + 2.0 * pc.regression_.transpose() * schur_factor.solve(pc.regression_);
        const SpdMatrix precision_factor = factor_block(precision, "observed precision", cluster);
        pc.delta_obs_ = factor_block(precision_factor.inverse() / gamma, "observed covariance block", cluster);
      }
    } else {
      pc.delta_obs_ = SpdMatrix::from(Matrix(0, 0));
    }
  } else {
    pc.delta_miss_ = SpdMatrix::from(Matrix(0, 0));
    pc.logdet_delta_miss_ = 0.0;
    pc.delta_obs_ = factor_block(blocks.Sigma_obs / gamma, "observed covariance block", cluster);
  }
  pc.blocks_ = std::move(blocks);
  return pc;
}

Vector PatternConditional::conditional_mean(const Vector& x_obs) const {
  if (x_obs.size() != blocks_.mu_obs.size()) throw DomainError("conditional_mean: x_obs size mismatch");
  if (blocks_.mu_miss.size() == 0) return Vector(0);
  if (x_obs.size() == 0) return blocks_.mu_miss;
  return blocks_.mu_miss + regression_ * (x_obs - blocks_.mu_obs);
}

ConditionalMoments conditional_moments(const Vector& x_obs, const GaussianBlocks& blocks, double gamma,
                                       MarginalMode mode) {
  const PatternConditional pc = PatternConditional::build(blocks, gamma, mode);
  return ConditionalMoments{pc.conditional_mean(x_obs), pc.delta_miss(), pc.delta_obs(),
                            pc.logdet_delta_miss()};
}

std::pair<Vector, Matrix> completed_moments(const Vector& x_obs, const ConditionalMoments& cm,
                                            const std::vector<Eigen::Index>& observed_index,
                                            const std::vector<Eigen::Index>& missing_index) {
  if (static_cast<Eigen::Index>(observed_index.size()) != x_obs.size() ||
      static_cast<Eigen::Index>(missing_index.size()) != cm.eps_miss.size()) {
    throw DomainError("completed_moments: shape mismatch");
  }
  const auto d = static_cast<Eigen::Index>(observed_index.size() + missing_index.size());
  Vector x(d);
  Matrix delta = Matrix::Zero(d, d);
  for (std::size_t a = 0; a < observed_index.size(); ++a) x(observed_index[a]) = x_obs(static_cast<Eigen::Index>(a));
  for (std::size_t a = 0; a < missing_index.size(); ++a) {
    x(missing_index[a]) = cm.eps_miss(static_cast<Eigen::Index>(a));
    for (std::size_t b = 0; b < missing_index.size(); ++b) {
      delta(missing_index[a], missing_index[b]) =
          cm.delta_miss.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return {x, delta};
}

}  // namespace robust_smix
