#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "molpool/train.hpp"

namespace molpool::train {

double metric_rmse(const std::vector<double>& preds,
                   const std::vector<double>& targets) {
  if (preds.empty() || preds.size() != targets.size())
    throw std::invalid_argument("rmse: empty or mismatched inputs");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - targets[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(preds.size()));
}

double metric_r2(const std::vector<double>& preds,
                 const std::vector<double>& targets) {
  if (preds.empty() || preds.size() != targets.size())
    throw std::invalid_argument("r2: empty or mismatched inputs");
  const double mean =
      std::accumulate(targets.begin(), targets.end(), 0.0) / targets.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ss_res += (targets[i] - preds[i]) * (targets[i] - preds[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0)
    throw std::invalid_argument("r2: constant targets leave R^2 undefined");
  return 1.0 - ss_res / ss_tot;
}

double metric_rocauc(const std::vector<double>& scores,
                     const std::vector<int>& labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw std::invalid_argument("roc_auc: empty or mismatched inputs");
  long n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1)
      throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    n_pos += y;
  }
  const long n = static_cast<long>(scores.size());
  const long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument(
        "roc_auc: undefined, only one class present");

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](long a, long b) { return scores[a] < scores[b]; });

  // midranks: tied scores share the average of their 1-based rank range
  std::vector<double> rank(n);
  long i = 0;
  while (i < n) {
    long j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (long k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  for (long k = 0; k < n; ++k)
    if (labels[k] == 1) pos_rank_sum += rank[k];
  return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                             static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace molpool::train
