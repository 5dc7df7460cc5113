#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flowsentry {

// Dense row-major n x p matrix of flow features with named columns.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  // Zero-filled matrix; empty `names` yields f0, f1, ...
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<std::string> names = {});

  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::vector<std::string> names = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;

  bool all_finite() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace flowsentry
