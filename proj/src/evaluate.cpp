#include "robust_smix/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b, bool* degenerate) {
  if (a.size() != b.size()) throw DomainError("adjusted_rand_index: label vectors differ in length");
  if (degenerate) *degenerate = false;
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, n] : joint) index += choose2(n);
  for (const auto& [key, n] : ra) sa += choose2(n);
  for (const auto& [key, n] : rb) sb += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return (index - expected) / denom;
}

double majority_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DomainError("majority_accuracy: label vectors differ in length");
  if (predicted.empty()) return 0.0;
  std::map<int, std::map<int, std::size_t>> counts;
  for (std::size_t i = 0; i < predicted.size(); ++i) ++counts[predicted[i]][truth[i]];
  std::size_t hits = 0;
  for (const auto& [cluster, by_truth] : counts) {
    std::size_t best = 0;
    for (const auto& [label, n] : by_truth) best = std::max(best, n);
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double auroc_low_is_positive(const std::vector<double>& scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw DomainError("auroc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
  // Mann-Whitney with average ranks; rank 1 = lowest score.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (positive[idx[t]]) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  for (bool p : positive) (p ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  // U counts pairs where the positive ranks above the negative; invert for low-is-positive.
  const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return 1.0 - u / (np * nn);
}

std::optional<double> masked_rmse(const Matrix& estimate, const Matrix& truth, const BoolMatrix& cells) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols() || cells.rows() != truth.rows() ||
      cells.cols() != truth.cols()) {
    throw DomainError("masked_rmse: shape mismatch");
  }
  double sse = 0.0;
  std::size_t n = 0;
  for (Eigen::Index j = 0; j < truth.rows(); ++j) {
    for (Eigen::Index c = 0; c < truth.cols(); ++c) {
      if (!cells(j, c)) continue;
      const double e = estimate(j, c) - truth(j, c);
      sse += e * e;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return std::sqrt(sse / static_cast<double>(n));
}

EvalReport evaluate(const std::vector<int>& predicted, const std::vector<int>& truth, const Matrix* imputed,
                    const Matrix* true_values, const BoolMatrix* was_missing,
                    const std::vector<double>* outlier_scores) {
  if (predicted.size() != truth.size()) throw DomainError("evaluate: prediction and truth lengths differ");
  EvalReport rep;
  std::vector<int> p_in, t_in;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0) continue;
    p_in.push_back(predicted[i]);
    t_in.push_back(truth[i]);
  }
  bool degenerate = false;
  rep.ari = adjusted_rand_index(p_in, t_in, &degenerate);
  if (degenerate) rep.notes.push_back("adjusted Rand index undefined for single-cluster labelings; reported as 0");
  rep.accuracy = majority_accuracy(p_in, t_in);
  if (imputed && true_values && was_missing) rep.imputation_rmse = masked_rmse(*imputed, *true_values, *was_missing);
  if (outlier_scores) {
    if (outlier_scores->size() != truth.size()) throw DomainError("evaluate: outlier score length differs");
    std::vector<bool> pos(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) pos[i] = truth[i] < 0;
    const double a = auroc_low_is_positive(*outlier_scores, pos);
    if (std::isfinite(a)) rep.outlier_auroc = a;
  }
  return rep;
}

}  // namespace robust_smix
