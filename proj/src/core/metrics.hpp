#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace flowsentry {

struct EvalResult {
  std::optional<double> auc;  // empty when one class is absent
  double accuracy = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Rank-based ROC AUC; tied scores share their mean rank, so a tie between a
// positive and a negative counts one half. Throws Error(undefined) when
// either class is missing.
double roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores);

double accuracy(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions);

EvalResult evaluate(std::span<const std::uint8_t> labels, std::span<const double> scores,
                    std::span<const std::uint8_t> predictions);

}  // namespace flowsentry
