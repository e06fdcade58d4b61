#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robust_smix/model.hpp"

namespace robust_smix {

/// Pair-counting ARI. When the index is undefined (both partitions trivial)
/// returns 0 and sets *degenerate.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b, bool* degenerate = nullptr);

/// Fraction of rows whose predicted cluster maps, by majority vote, to their true label.
double majority_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Probability that a positive scores below a negative (ties count half):
/// low scores should flag positives.
double auroc_low_is_positive(const std::vector<double>& scores, const std::vector<bool>& positive);

/// Root mean squared error over cells flagged in `cells`; nullopt when none are.
std::optional<double> masked_rmse(const Matrix& estimate, const Matrix& truth, const BoolMatrix& cells);

struct EvalReport {
  double ari = 0.0;
  double accuracy = 0.0;
  std::optional<double> imputation_rmse;
  std::optional<double> outlier_auroc;
  std::vector<std::string> notes;
};

/// Rows labelled -1 in `truth` are outliers: excluded from ARI and accuracy
/// and used as positives for the outlier-score AUROC when scores are given.
EvalReport evaluate(const std::vector<int>& predicted, const std::vector<int>& truth,
                    const Matrix* imputed = nullptr, const Matrix* true_values = nullptr,
                    const BoolMatrix* was_missing = nullptr, const std::vector<double>* outlier_scores = nullptr);

}  // namespace robust_smix
