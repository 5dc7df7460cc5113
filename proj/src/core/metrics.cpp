#include "metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace flowsentry {

double roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw Error(ErrorCode::invalid_argument, "roc_auc: length mismatch");
  const std::size_t n = labels.size();
  std::size_t n_pos = 0;
  for (auto l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::undefined, "roc_auc: undefined with a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are 1-based; a tie group spanning ranks [i+1, j] shares (i+1+j)/2.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) rank_sum += mean_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(n_pos), q = static_cast<double>(n_neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double accuracy(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions) {
  if (labels.size() != predictions.size()) throw Error(ErrorCode::invalid_argument, "accuracy: length mismatch");
  if (labels.empty()) throw Error(ErrorCode::invalid_argument, "accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += (labels[i] != 0) == (predictions[i] != 0) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

EvalResult evaluate(std::span<const std::uint8_t> labels, std::span<const double> scores,
                    std::span<const std::uint8_t> predictions) {
  EvalResult out;
  for (auto l : labels) (l ? out.n_pos : out.n_neg)++;
  out.accuracy = accuracy(labels, predictions);
  if (out.n_pos > 0 && out.n_neg > 0) out.auc = roc_auc(labels, scores);
  return out;
}

}  // namespace flowsentry
