#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "matrix.hpp"

namespace flowsentry {

using ScoreVector = std::vector<double>;

struct IforestParams {
  std::size_t trees = 100;
  std::size_t subsample = 256;
};

// Flat node array; node 0 is the root. External nodes have left == right == 0.
struct IsolationTree {
  struct Node {
    std::uint32_t feature = 0;
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t size = 0;   // rows that terminated here (external only)
    std::uint32_t depth = 0;

    bool external() const noexcept { return left == 0 && right == 0; }
  };

  std::vector<Node> nodes;
  std::size_t height_limit = 0;

  // Edges to the external node plus c(size) of that node.
  double path_length(std::span<const double> row) const;
};

struct IforestModel {
  std::vector<IsolationTree> trees;
  std::size_t subsample_size = 0;
  double normalizer = 0.0;  // c(subsample_size)
  std::size_t dims = 0;
};

// Average path length of an unsuccessful BST search over m items;
// c(1) = 0 and c(2) = 1 by convention.
double average_path_length(std::size_t m);

IforestModel fit_iforest(const FeatureMatrix& train, const IforestParams& params, std::uint64_t seed);

double mean_path_length(const IforestModel& model, std::span<const double> row);

// s(x) = 2^(-E[h(x)] / c(psi)).
double iforest_score_from_path(double mean_path, double normalizer);

ScoreVector score_iforest(const IforestModel& model, const FeatureMatrix& x);

}  // namespace flowsentry
