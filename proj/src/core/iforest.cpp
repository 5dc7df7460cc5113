#include "iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"
#include "random.hpp"

namespace flowsentry {

double average_path_length(std::size_t m) {
  if (m <= 1) return 0.0;
  if (m == 2) return 1.0;
  const double mm = static_cast<double>(m);
  const double harmonic = std::log(mm - 1.0) + std::numbers::egamma;
  return 2.0 * harmonic - 2.0 * (mm - 1.0) / mm;
}

double IsolationTree::path_length(std::span<const double> row) const {
  std::size_t at = 0;
  while (!nodes[at].external()) {
    at = row[nodes[at].feature] < nodes[at].split ? nodes[at].left : nodes[at].right;
  }
  return static_cast<double>(nodes[at].depth) + average_path_length(nodes[at].size);
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, Rng& rng, std::size_t height_limit) : x_(x), rng_(rng) {
    tree_.height_limit = height_limit;
  }

  IsolationTree build(std::vector<std::size_t> rows) {
    grow(rows, 0, rows.size(), 0);
    return std::move(tree_);
  }

 private:
  std::pair<double, double> range(const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
                                  std::size_t f) const {
    double lo = x_(rows[begin], f), hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = std::min(lo, x_(rows[i], f));
      hi = std::max(hi, x_(rows[i], f));
    }
    return {lo, hi};
  }

  std::uint32_t add_leaf(std::size_t size, std::size_t depth) {
    IsolationTree::Node node;
    node.size = static_cast<std::uint32_t>(size);
    node.depth = static_cast<std::uint32_t>(depth);
    tree_.nodes.push_back(node);
    return static_cast<std::uint32_t>(tree_.nodes.size() - 1);
  }

  std::uint32_t grow(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, std::size_t depth) {
    const std::size_t size = end - begin;
    if (size <= 1 || depth >= tree_.height_limit) return add_leaf(size, depth);

    const std::size_t p = x_.cols();
    std::size_t feature = uniform_index(rng_, p);
    auto [lo, hi] = range(rows, begin, end, feature);
    if (!(lo < hi)) {
      // Retry uniformly among the remaining features that still vary here.
      std::vector<std::size_t> varying;
      for (std::size_t f = 0; f < p; ++f) {
        if (f == feature) continue;
        auto [l, h] = range(rows, begin, end, f);
        if (l < h) varying.push_back(f);
      }
      if (varying.empty()) return add_leaf(size, depth);
      feature = varying[uniform_index(rng_, varying.size())];
      std::tie(lo, hi) = range(rows, begin, end, feature);
    }
    double split;
    do {
      split = lo + uniform_open(rng_) * (hi - lo);
    } while (!(split > lo && split < hi));

    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::size_t r) { return x_(r, feature) < split; });
    const auto middle = static_cast<std::size_t>(mid - rows.begin());

    const auto self = static_cast<std::uint32_t>(tree_.nodes.size());
    IsolationTree::Node node;
    node.feature = static_cast<std::uint32_t>(feature);
    node.split = split;
    node.depth = static_cast<std::uint32_t>(depth);
    tree_.nodes.push_back(node);
    const auto left = grow(rows, begin, middle, depth + 1);
    const auto right = grow(rows, middle, end, depth + 1);
    tree_.nodes[self].left = left;
    tree_.nodes[self].right = right;
    return self;
  }

  const FeatureMatrix& x_;
  Rng& rng_;
  IsolationTree tree_;
};

}  // namespace

IforestModel fit_iforest(const FeatureMatrix& train, const IforestParams& params, std::uint64_t seed) {
  if (train.rows() < 2) throw Error(ErrorCode::invalid_argument, "iforest: need at least 2 training rows");
  if (params.trees == 0) throw Error(ErrorCode::invalid_argument, "iforest: trees must be >= 1");
  if (params.subsample < 2) throw Error(ErrorCode::invalid_argument, "iforest: subsample must be >= 2");

  IforestModel model;
  model.dims = train.cols();
  model.subsample_size = std::min(params.subsample, train.rows());
  model.normalizer = average_path_length(model.subsample_size);
  const auto height_limit =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(model.subsample_size))));

  model.trees.reserve(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(seed, t));
    auto rows = sample_without_replacement(train.rows(), model.subsample_size, rng);
    model.trees.push_back(TreeBuilder(train, rng, height_limit).build(std::move(rows)));
  }
  return model;
}

double mean_path_length(const IforestModel& model, std::span<const double> row) {
  double total = 0.0;
  for (const auto& tree : model.trees) total += tree.path_length(row);
  return total / static_cast<double>(model.trees.size());
}

double iforest_score_from_path(double mean_path, double normalizer) {
  return std::exp2(-mean_path / normalizer);
}

ScoreVector score_iforest(const IforestModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.dims) {
    throw Error(ErrorCode::invalid_argument, "iforest: expected " + std::to_string(model.dims) +
                                                 " columns, got " + std::to_string(x.cols()));
  }
  ScoreVector scores(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    scores[r] = iforest_score_from_path(mean_path_length(model, x.row(r)), model.normalizer);
  }
  return scores;
}

}  // namespace flowsentry
