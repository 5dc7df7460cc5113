#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "matrix.hpp"

namespace flowsentry {

using ScoreVector = std::vector<double>;

// kNN outlier score: Euclidean distance to the k-th nearest training row.
struct KnnParams {
  std::size_t k = 5;
};

struct KnnModel {
  FeatureMatrix train;
  std::size_t k = 5;
};

KnnModel fit_knn(const FeatureMatrix& train, const KnnParams& params = {});
ScoreVector score_knn(const KnnModel& model, const FeatureMatrix& x);

// Lloyd's k-means with k-means++ seeding. Equidistant points go to the lowest
// centroid index; an emptied cluster is re-seeded at the point farthest from
// its own centroid.
struct KMeansResult {
  FeatureMatrix centroids;
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> sizes;
  std::size_t iterations = 0;
  std::size_t reseeds = 0;
};

inline constexpr std::size_t kKMeansMaxIterations = 100;
inline constexpr double kKMeansTolerance = 1e-4;

KMeansResult kmeans(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations = kKMeansMaxIterations, double tolerance = kKMeansTolerance);

std::size_t nearest_centroid(const FeatureMatrix& centroids, std::span<const double> row);

struct CblofParams {
  std::size_t k_clusters = 8;
  double alpha = 0.9;
  double beta = 5.0;
};

// Centroids are stored largest cluster first; clusters [0, n_large) are "large".
struct CblofModel {
  FeatureMatrix centroids;
  std::vector<std::size_t> cluster_sizes;
  std::size_t n_large = 0;
  std::size_t n_train = 0;
  double alpha = 0.9;
  double beta = 5.0;
};

// Number of large clusters: the smallest b such that the b largest clusters
// hold at least alpha * n rows, or size[b-1] / size[b] >= beta.
// `sizes` must be sorted descending.
std::size_t cblof_boundary(std::span<const std::size_t> sizes, std::size_t n, double alpha, double beta);

CblofModel fit_cblof(const FeatureMatrix& train, const CblofParams& params, std::uint64_t seed);
ScoreVector score_cblof(const CblofModel& model, const FeatureMatrix& x);

struct HbosParams {
  std::size_t bins = 10;
};

inline constexpr double kHbosFloor = 1e-6;

struct HbosHistogram {
  double lower = 0.0;
  double width = 1.0;
  std::vector<double> heights;  // max 1, empty bins at kHbosFloor

  std::size_t bin_of(double v) const;
};

struct HbosModel {
  std::vector<HbosHistogram> histograms;
  std::size_t bins = 10;
};

HbosModel fit_hbos(const FeatureMatrix& train, const HbosParams& params = {});
ScoreVector score_hbos(const HbosModel& model, const FeatureMatrix& x);

}  // namespace flowsentry
