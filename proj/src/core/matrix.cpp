#include "matrix.hpp"

#include <cmath>
#include <unordered_set>

#include "error.hpp"

namespace flowsentry {

namespace {

std::vector<std::string> checked_names(std::vector<std::string> names, std::size_t cols) {
  if (names.empty()) {
    names.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    return names;
  }
  if (names.size() != cols) {
    throw Error(ErrorCode::invalid_argument, "column name count does not match column count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate column name '" + n + "'");
    }
  }
  return names;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0), names_(checked_names(std::move(names), cols)) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(std::move(values)), names_(checked_names(std::move(names), cols)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::invalid_argument, "value count does not match rows x cols");
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  out.reserve(rows.size() * cols_);
  for (std::size_t r : rows) {
    if (r >= rows_) throw Error(ErrorCode::invalid_argument, "row index out of range");
    const auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return FeatureMatrix(rows.size(), cols_, std::move(out), names_);
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
  std::vector<double> out;
  out.reserve(rows_ * cols.size());
  std::vector<std::string> names;
  names.reserve(cols.size());
  for (std::size_t c : cols) {
    if (c >= cols_) throw Error(ErrorCode::invalid_argument, "column index out of range");
    names.push_back(names_[c]);
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c : cols) out.push_back((*this)(r, c));
  }
  return FeatureMatrix(rows_, cols.size(), std::move(out), std::move(names));
}

bool FeatureMatrix::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace flowsentry
