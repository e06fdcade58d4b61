#include "robust_smix/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "robust_smix/config.hpp"
#include "robust_smix/csv.hpp"
#include "robust_smix/errors.hpp"

namespace robust_smix {

void validate(const SyntheticSpec& s) {
  if (s.J < 1 || s.d < 1 || s.K < 1) throw ConfigError("synthetic: J, d and K must be positive");
  if (!(s.separation > 0.0)) throw ConfigError("synthetic: separation must be positive");
  if (!(s.outlier_fraction >= 0.0 && s.outlier_fraction < 1.0)) {
    throw ConfigError("synthetic: outlier_fraction must lie in [0, 1)");
  }
  if (!(s.outlier_scale > 0.0)) throw ConfigError("synthetic: outlier_scale must be positive");
  if (!(s.missing_fraction >= 0.0 && s.missing_fraction < 1.0)) {
    throw ConfigError("synthetic: missing_fraction must lie in [0, 1)");
  }
  if (s.d == 1 && s.missing_fraction > 0.0) {
    throw ConfigError("synthetic: with d = 1 every masked row would be empty");
  }
  if (s.d >= 2 && s.missing_fraction >= 1.0 - 1.0 / static_cast<double>(s.d)) {
    throw ConfigError("synthetic: missing_fraction >= 1 - 1/d leaves too many empty rows");
  }
  const double lo = s.d > 1 ? -1.0 / static_cast<double>(s.d - 1) : -1.0;
  if (!(s.correlation > lo && s.correlation < 1.0)) {
    throw ConfigError("synthetic: correlation outside the positive-definite range");
  }
}

Matrix component_means(const SyntheticSpec& s) {
  Matrix m = Matrix::Zero(s.K, s.d);
  if (s.K == 1) return m;
  if (s.d >= s.K) {
    for (int k = 0; k < s.K; ++k) m(k, k) = s.separation / std::sqrt(2.0);
  } else if (s.d >= 2) {
    const double pi = std::acos(-1.0);
    const double radius = s.separation / (2.0 * std::sin(pi / s.K));
    // Off-axis rotation: with a vertex on the x axis two means share a coordinate,
    // so a row missing the other one cannot tell them apart.
    const double offset = pi / (4.0 * s.K);
    for (int k = 0; k < s.K; ++k) {
      m(k, 0) = radius * std::cos(offset + 2.0 * pi * k / s.K);
      m(k, 1) = radius * std::sin(offset + 2.0 * pi * k / s.K);
    }
  } else {
    for (int k = 0; k < s.K; ++k) m(k, 0) = (k - 0.5 * (s.K - 1)) * s.separation;
  }
  return m;
}

SyntheticData generate(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, spec.K - 1);

  const Eigen::Index J = spec.J, d = spec.d;
  SyntheticData out;
  out.means = component_means(spec);
  const Vector centroid = out.means.colwise().mean().transpose();

  Matrix corr = Matrix::Constant(d, d, spec.correlation);
  corr.diagonal().setOnes();
  const Matrix L = corr.llt().matrixL();

  const auto n_out = static_cast<Eigen::Index>(std::llround(spec.outlier_fraction * static_cast<double>(J)));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(J));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_outlier(static_cast<std::size_t>(J), false);
  for (Eigen::Index i = 0; i < n_out; ++i) is_outlier[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  out.truth.resize(J, d);
  out.labels.resize(static_cast<std::size_t>(J));
  const double half = spec.outlier_scale * spec.separation;
  for (Eigen::Index j = 0; j < J; ++j) {
    if (is_outlier[static_cast<std::size_t>(j)]) {
      out.labels[static_cast<std::size_t>(j)] = -1;
      for (Eigen::Index c = 0; c < d; ++c) out.truth(j, c) = centroid(c) + half * (2.0 * unit(rng) - 1.0);
    } else {
      const int k = pick(rng);
      out.labels[static_cast<std::size_t>(j)] = k;
      Vector z(d);
      for (Eigen::Index c = 0; c < d; ++c) z(c) = normal(rng);
      out.truth.row(j) = (out.means.row(k).transpose() + L * z).transpose();
    }
  }

  BoolMatrix mask = BoolMatrix::Constant(J, d, true);
  if (spec.missing_fraction > 0.0) {
    for (Eigen::Index j = 0; j < J; ++j) {
      bool ok = false;
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        for (Eigen::Index c = 0; c < d; ++c) mask(j, c) = unit(rng) >= spec.missing_fraction;
        ok = mask.row(j).any();
      }
      if (!ok) throw ConfigError(fmt::format("synthetic: could not draw a non-empty mask for row {}", j));
    }
  }
  out.data = MaskedDataset(out.truth, mask);
  return out;
}

SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec s;
  for (const auto& [key, kv] : parse_key_values(in)) {
    if (key == "J") {
      s.J = static_cast<Eigen::Index>(to_integer(kv, key));
    } else if (key == "d") {
      s.d = static_cast<Eigen::Index>(to_integer(kv, key));
    } else if (key == "K") {
      s.K = static_cast<int>(to_integer(kv, key));
    } else if (key == "separation") {
      s.separation = to_double(kv, key);
    } else if (key == "outlier_fraction") {
      s.outlier_fraction = to_double(kv, key);
    } else if (key == "outlier_scale") {
      s.outlier_scale = to_double(kv, key);
    } else if (key == "missing_fraction") {
      s.missing_fraction = to_double(kv, key);
    } else if (key == "correlation") {
      s.correlation = to_double(kv, key);
    } else if (key == "seed") {
      s.seed = to_unsigned(kv, key);
    } else {
      throw ParseError(fmt::format("line {}: unknown key '{}'", kv.line, key), kv.line);
    }
  }
  validate(s);
  return s;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_synthetic_spec(in);
}

void save_truth(const std::string& path, const SyntheticData& s) {
  Table t;
  t.header.push_back("label");
  for (const auto& n : s.data.names()) t.header.push_back("true_" + n);
  for (const auto& n : s.data.names()) t.header.push_back("miss_" + n);
  for (Eigen::Index j = 0; j < s.data.rows(); ++j) {
    std::vector<std::string> row{std::to_string(s.labels[static_cast<std::size_t>(j)])};
    for (Eigen::Index c = 0; c < s.data.dim(); ++c) row.push_back(format_double(s.truth(j, c)));
    for (Eigen::Index c = 0; c < s.data.dim(); ++c) row.push_back(s.data.observed(j, c) ? "0" : "1");
    t.rows.push_back(std::move(row));
  }
  write_table(path, t);
}

Truth load_truth(const std::string& path) {
  const Table t = read_table(path);
  const std::size_t label_col = t.column("label");
  std::vector<std::size_t> true_cols, miss_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i].rfind("true_", 0) == 0) true_cols.push_back(i);
    if (t.header[i].rfind("miss_", 0) == 0) miss_cols.push_back(i);
  }
  if (true_cols.size() != miss_cols.size()) throw ParseError(path + ": true_/miss_ column counts differ", 1);
  Truth out;
  const auto J = static_cast<Eigen::Index>(t.rows.size());
  const auto d = static_cast<Eigen::Index>(true_cols.size());
  out.values.resize(J, d);
  out.missing.resize(J, d);
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto& row = t.rows[static_cast<std::size_t>(j)];
    double lab = 0.0;
    if (!parse_double(row[label_col], lab)) {
      throw ParseError(fmt::format("{} line {}: bad label", path, j + 2), static_cast<std::size_t>(j + 2));
    }
    out.labels.push_back(static_cast<int>(lab));
    for (Eigen::Index c = 0; c < d; ++c) {
      double v = 0.0;
      if (!parse_double(row[true_cols[static_cast<std::size_t>(c)]], v)) {
        throw ParseError(fmt::format("{} line {}: bad value", path, j + 2), static_cast<std::size_t>(j + 2));
      }
      out.values(j, c) = v;
      out.missing(j, c) = row[miss_cols[static_cast<std::size_t>(c)]] == "1";
    }
  }
  return out;
}

}  // namespace robust_smix
