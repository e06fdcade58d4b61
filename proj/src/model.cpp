#include "robust_smix/model.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "robust_smix/errors.hpp"

namespace robust_smix {

MaskedDataset::MaskedDataset(Matrix values, BoolMatrix mask, std::vector<std::string> names)
    : values_(std::move(values)), mask_(std::move(mask)), dim_(values_.cols()), names_(std::move(names)) {
  if (mask_.rows() != values_.rows() || mask_.cols() != values_.cols()) {
    throw ConfigError("MaskedDataset: mask shape does not match values");
  }
  if (dim_ < 1) throw ConfigError("MaskedDataset: dimension must be positive");
  if (names_.empty()) {
    for (Eigen::Index i = 0; i < dim_; ++i) names_.push_back("x" + std::to_string(i));
  } else if (static_cast<Eigen::Index>(names_.size()) != dim_) {
    throw ConfigError("MaskedDataset: feature name count does not match dimension");
  }
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      if (!mask_(j, i)) {
        values_(j, i) = std::numeric_limits<double>::quiet_NaN();
      } else if (!std::isfinite(values_(j, i))) {
        throw ConfigError("MaskedDataset: non-finite observed value at row " +
                          std::to_string(j) + ", column " + std::to_string(i));
      }
    }
  }

  std::map<std::vector<bool>, std::size_t> index;
  pattern_of_row_.reserve(static_cast<std::size_t>(values_.rows()));
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    std::vector<bool> key(static_cast<std::size_t>(dim_));
    for (Eigen::Index i = 0; i < dim_; ++i) key[static_cast<std::size_t>(i)] = mask_(j, i);
    auto [it, inserted] = index.try_emplace(key, patterns_.size());
    if (inserted) {
      MaskPattern p;
      p.observed = key;
      for (Eigen::Index i = 0; i < dim_; ++i) {
        (key[static_cast<std::size_t>(i)] ? p.observed_index : p.missing_index).push_back(i);
      }
      patterns_.push_back(std::move(p));
    }
    pattern_of_row_.push_back(it->second);
  }
}

MaskedDataset MaskedDataset::fully_observed(Matrix values, std::vector<std::string> names) {
  BoolMatrix mask = BoolMatrix::Constant(values.rows(), values.cols(), true);
  return MaskedDataset(std::move(values), std::move(mask), std::move(names));
}

double MaskedDataset::value(Eigen::Index row, Eigen::Index col) const {
  if (!mask_(row, col)) {
    throw DomainError("MaskedDataset: cell (" + std::to_string(row) + ", " +
                      std::to_string(col) + ") is missing");
  }
  return values_(row, col);
}

Eigen::Index MaskedDataset::observed_count(Eigen::Index row) const {
  return patterns_[pattern_of(row)].observed_count();
}

Vector MaskedDataset::observed_values(Eigen::Index row) const {
  const auto& idx = patterns_[pattern_of(row)].observed_index;
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) out(static_cast<Eigen::Index>(t)) = values_(row, idx[t]);
  return out;
}

void MaskedDataset::require_fit_ready() const {
  if (rows() == 0) throw ConfigError("dataset has no rows");
  bool any_row = false;
  for (Eigen::Index j = 0; j < rows() && !any_row; ++j) any_row = observed_count(j) > 0;
  if (!any_row) throw ConfigError("dataset has no row with an observed cell");
  for (Eigen::Index i = 0; i < dim_; ++i) {
    if (!mask_.col(i).any()) {
      throw ConfigError("feature '" + names_[static_cast<std::size_t>(i)] + "' has no observed cells");
    }
  }
}

Matrix LatentPosterior::missing_covariance(Eigen::Index row, Eigen::Index cluster) const {
  const std::size_t pattern = pattern_of_row[static_cast<std::size_t>(row)];
  const MaskPattern& p = patterns[pattern];
  const Eigen::Index d = static_cast<Eigen::Index>(p.observed.size());
  Matrix out = Matrix::Zero(d, d);
  const Matrix& block = missing_cov[static_cast<std::size_t>(cluster)][pattern];
  for (std::size_t a = 0; a < p.missing_index.size(); ++a) {
    for (std::size_t b = 0; b < p.missing_index.size(); ++b) {
      out(p.missing_index[a], p.missing_index[b]) =
          block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

PriorSpec default_priors(const MaskedDataset& data, int K) {
  if (data.rows() == 0) throw ConfigError("default_priors: dataset is empty");
  const Eigen::Index d = data.dim();
  PriorSpec priors;
  priors.K = K;
  priors.kappa0 = 1.0;
  priors.eta0 = 0.01;
  priors.gamma0 = static_cast<double>(d) + 2.0;
  priors.mu0 = Vector::Zero(d);
  priors.Sigma0 = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double sum = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      if (data.observed(j, i)) {
        sum += data.values()(j, i);
        ++n;
      }
    }
    const std::string& name = data.names()[static_cast<std::size_t>(i)];
    if (n == 0) throw ConfigError("default_priors: feature '" + name + "' has no observed cells");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      if (data.observed(j, i)) ss += (data.values()(j, i) - mean) * (data.values()(j, i) - mean);
    }
    const double var = ss / static_cast<double>(n);
    if (!(var > 0.0)) {
      throw ConfigError("default_priors: feature '" + name + "' has zero observed variance");
    }
    priors.mu0(i) = mean;
    priors.Sigma0(i, i) = var;
  }
  priors.p0 = 1.0;
  priors.q0 = 1.0;
  priors.s0 = 1.0;
  priors.r0 = 2.0;
  return priors;
}

PriorSpec validate(const PriorSpec& priors, const MaskedDataset& data) {
  const Eigen::Index d = data.dim();
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (priors.K < 1) throw ConfigError("priors: K must be positive");
  if (!positive(priors.kappa0)) throw ConfigError("priors: kappa0 must be positive");
  if (!positive(priors.eta0)) throw ConfigError("priors: eta0 must be positive");
  if (priors.mu0.size() != d) throw ConfigError("priors: mu0 dimension does not match data");
  if (!priors.mu0.allFinite()) throw ConfigError("priors: mu0 must be finite");
  if (!(priors.gamma0 > static_cast<double>(d) + 1.0)) {
    throw ConfigError("priors: gamma0 must exceed d+1 (inverse-Wishart mean undefined)");
  }
  if (priors.Sigma0.rows() != d || priors.Sigma0.cols() != d) {
    throw ConfigError("priors: Sigma0 dimension does not match data");
  }
  try {
    (void)SpdMatrix::from(priors.Sigma0);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("priors: Sigma0 is not symmetric positive definite: ") + e.what());
  }
  if (!positive(priors.p0) || !positive(priors.q0) || !positive(priors.s0) || !positive(priors.r0)) {
    throw ConfigError("priors: p0, q0, s0, r0 must be positive");
  }
  return priors;
}

void validate(const FitConfig& config, int K) {
  if (config.max_iterations < 1) throw ConfigError("config: max_iterations must be positive");
  if (!(config.elbo_rel_tolerance > 0.0)) throw ConfigError("config: elbo_rel_tolerance must be positive");
  if (!(config.min_responsibility_floor >= 0.0) ||
      !(config.min_responsibility_floor < 1.0 / static_cast<double>(K))) {
    throw ConfigError("config: min_responsibility_floor must lie in [0, 1/K)");
  }
}

std::string to_string(InitMethod m) { return m == InitMethod::kmeanspp ? "kmeanspp" : "random"; }
std::string to_string(MarginalMode m) {
  return m == MarginalMode::consistent ? "consistent" : "paper_literal";
}
std::string to_string(ModelKind m) { return m == ModelKind::student ? "student" : "gaussian"; }
std::string to_string(ScatterMode m) {
  return m == ScatterMode::unnormalized ? "unnormalized" : "normalized";
}

InitMethod parse_init_method(const std::string& s) {
  if (s == "kmeanspp") return InitMethod::kmeanspp;
  if (s == "random") return InitMethod::random;
  throw ConfigError("unknown init_method '" + s + "'");
}
MarginalMode parse_marginal_mode(const std::string& s) {
  if (s == "consistent") return MarginalMode::consistent;
  if (s == "paper_literal") return MarginalMode::paper_literal;
  throw ConfigError("unknown marginal_mode '" + s + "'");
}
ModelKind parse_model_kind(const std::string& s) {
  if (s == "student") return ModelKind::student;
  if (s == "gaussian") return ModelKind::gaussian;
  throw ConfigError("unknown model_kind '" + s + "'");
}
ScatterMode parse_scatter_mode(const std::string& s) {
  if (s == "unnormalized") return ScatterMode::unnormalized;
  if (s == "normalized") return ScatterMode::normalized;
  throw ConfigError("unknown scatter_mode '" + s + "'");
}

}  // namespace robust_smix
