#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "robust_smix/model.hpp"

namespace robust_smix {

struct SyntheticSpec {
  Eigen::Index J = 300;
  Eigen::Index d = 2;
  int K = 3;
  double separation = 6.0;  // distance between neighbouring means, in unit std
  double outlier_fraction = 0.0;
  double outlier_scale = 2.0;  // box half-width in units of separation
  double missing_fraction = 0.0;
  double correlation = 0.0;  // equal off-diagonal correlation of each component
  std::uint64_t seed = 0;
};

struct SyntheticData {
  MaskedDataset data;
  std::vector<int> labels;  // component index, -1 for outliers
  Matrix truth;             // complete values before masking
  Matrix means;             // K x d component means
};

/// Throws ConfigError for out-of-range fields, for missing_fraction > 0 with
/// d = 1, and for missing_fraction >= 1 - 1/d with d >= 2.
void validate(const SyntheticSpec& spec);

/// K x d means at the given separation: scaled basis vectors when d >= K,
/// a regular polygon (rotated off the axes) in the first two coordinates when K > d >= 2, evenly
/// spaced points when d = 1.
Matrix component_means(const SyntheticSpec& spec);

/// Deterministic per seed. Inlier rows draw a component uniformly; rows whose
/// MCAR mask leaves nothing observed are redrawn.
SyntheticData generate(const SyntheticSpec& spec);

/// Keys: J, d, K, separation, outlier_fraction, outlier_scale,
/// missing_fraction, correlation, seed.
SyntheticSpec parse_synthetic_spec(std::istream& in);
SyntheticSpec load_synthetic_spec(const std::string& path);

/// Columns: label, true_<name>..., miss_<name>... (1 = masked).
void save_truth(const std::string& path, const SyntheticData& s);

struct Truth {
  std::vector<int> labels;
  Matrix values;
  BoolMatrix missing;
};
Truth load_truth(const std::string& path);

}  // namespace robust_smix
