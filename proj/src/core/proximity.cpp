#include "proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "error.hpp"
#include "random.hpp"

namespace flowsentry {

namespace {

void check_dims(std::size_t expected, const FeatureMatrix& x, const char* who) {
  if (x.cols() != expected) {
    throw Error(ErrorCode::invalid_argument, std::string(who) + ": expected " + std::to_string(expected) +
                                                 " columns, got " + std::to_string(x.cols()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// kNN

KnnModel fit_knn(const FeatureMatrix& train, const KnnParams& params) {
  if (params.k == 0) throw Error(ErrorCode::invalid_argument, "knn: k must be positive");
  if (params.k >= train.rows()) {
    throw Error(ErrorCode::invalid_argument, "knn: k = " + std::to_string(params.k) +
                                                 " needs more than k training rows, got " +
                                                 std::to_string(train.rows()));
  }
  return KnnModel{train, params.k};
}

ScoreVector score_knn(const KnnModel& model, const FeatureMatrix& x) {
  check_dims(model.train.cols(), x, "knn");
  const std::size_t n = model.train.rows();
  ScoreVector scores(x.rows());
  std::vector<double> d2(n);
  for (std::size_t q = 0; q < x.rows(); ++q) {
    const auto query = x.row(q);
    bool self_skipped = false;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(query, model.train.row(i));
      if (d == 0.0 && !self_skipped) {
        self_skipped = true;
        continue;
      }
      d2[m++] = d;
    }
    // Exclusion can only leave n - 1 >= k candidates.
    auto kth = d2.begin() + static_cast<std::ptrdiff_t>(model.k - 1);
    std::nth_element(d2.begin(), kth, d2.begin() + static_cast<std::ptrdiff_t>(m));
    scores[q] = std::sqrt(*kth);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// k-means

std::size_t nearest_centroid(const FeatureMatrix& centroids, std::span<const double> row) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(row, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

FeatureMatrix kmeanspp_init(const FeatureMatrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows(), p = x.cols();
  FeatureMatrix centroids(k, p);
  auto copy_row = [&](std::size_t c, std::size_t r) {
    std::copy_n(x.row(r).begin(), p, centroids.row(c).begin());
  };
  copy_row(0, uniform_index(rng, n));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], squared_distance(x.row(r), centroids.row(c - 1)));
      total += d2[r];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = uniform_open(rng) * total;
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        acc += d2[r];
        if (acc >= target) {
          pick = r;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, n);
    }
    copy_row(c, pick);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const FeatureMatrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iterations,
                    double tolerance) {
  const std::size_t n = x.rows(), p = x.cols();
  if (k < 1 || n < k) {
    throw Error(ErrorCode::invalid_argument, "kmeans: need at least k = " + std::to_string(k) + " rows");
  }
  Rng rng(seed);
  KMeansResult res;
  res.centroids = kmeanspp_init(x, k, rng);
  res.assignment.assign(n, 0);
  const std::size_t max_reseeds = 10 * k;

  auto assign = [&] {
    res.sizes.assign(k, 0);
    for (std::size_t r = 0; r < n; ++r) {
      res.assignment[r] = nearest_centroid(res.centroids, x.row(r));
      ++res.sizes[res.assignment[r]];
    }
  };
  // Re-seeds every empty cluster; returns true if any was empty.
  auto reseed_empty = [&] {
    bool any = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (res.sizes[c] != 0) continue;
      any = true;
      if (++res.reseeds > max_reseeds) {
        throw Error(ErrorCode::numerical, "kmeans: cluster stays empty after " + std::to_string(max_reseeds) +
                                              " re-seeds");
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t own = res.assignment[r];
        if (res.sizes[own] <= 1) continue;
        const double d = squared_distance(x.row(r), res.centroids.row(own));
        if (d > far_d) {
          far_d = d;
          far = r;
        }
      }
      if (far_d <= 0.0) {
        throw Error(ErrorCode::numerical, "kmeans: fewer distinct rows than clusters");
      }
      std::copy_n(x.row(far).begin(), p, res.centroids.row(c).begin());
      --res.sizes[res.assignment[far]];
      res.assignment[far] = c;
      res.sizes[c] = 1;
    }
    return any;
  };

  bool converged = false;
  while (res.iterations < max_iterations) {
    ++res.iterations;
    assign();
    if (reseed_empty()) continue;

    FeatureMatrix next(k, p);
    for (std::size_t r = 0; r < n; ++r) {
      auto dst = next.row(res.assignment[r]);
      const auto src = x.row(r);
      for (std::size_t j = 0; j < p; ++j) dst[j] += src[j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto row = next.row(c);
      for (auto& v : row) v /= static_cast<double>(res.sizes[c]);
      shift = std::max(shift, std::sqrt(squared_distance(row, res.centroids.row(c))));
    }
    res.centroids = std::move(next);
    if (shift < tolerance) {
      converged = true;
      break;
    }
  }
  (void)converged;
  assign();
  while (reseed_empty()) {
    // A re-seed moved a single row; settle the partition around it.
    assign();
  }
  return res;
}

// ---------------------------------------------------------------------------
// CBLOF

std::size_t cblof_boundary(std::span<const std::size_t> sizes, std::size_t n, double alpha, double beta) {
  double cum = 0.0;
  for (std::size_t b = 1; b <= sizes.size(); ++b) {
    cum += static_cast<double>(sizes[b - 1]);
    if (cum >= alpha * static_cast<double>(n)) return b;
    if (b < sizes.size() && sizes[b] > 0 &&
        static_cast<double>(sizes[b - 1]) / static_cast<double>(sizes[b]) >= beta) {
      return b;
    }
  }
  return sizes.size();
}

CblofModel fit_cblof(const FeatureMatrix& train, const CblofParams& params, std::uint64_t seed) {
  if (params.k_clusters < 2) throw Error(ErrorCode::invalid_argument, "cblof: k_clusters must be >= 2");
  if (train.rows() < params.k_clusters) {
    throw Error(ErrorCode::invalid_argument, "cblof: fewer training rows than clusters");
  }
  if (!(params.alpha > 0.0 && params.alpha <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "cblof: alpha must lie in (0, 1]");
  }
  if (!(params.beta > 1.0)) throw Error(ErrorCode::invalid_argument, "cblof: beta must exceed 1");

  const auto km = kmeans(train, params.k_clusters, seed);
  const std::size_t k = params.k_clusters;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return km.sizes[a] > km.sizes[b]; });

  CblofModel model;
  model.centroids = km.centroids.select_rows(order);
  for (auto c : order) model.cluster_sizes.push_back(km.sizes[c]);
  model.n_train = train.rows();
  model.alpha = params.alpha;
  model.beta = params.beta;
  model.n_large = cblof_boundary(model.cluster_sizes, model.n_train, params.alpha, params.beta);
  return model;
}

ScoreVector score_cblof(const CblofModel& model, const FeatureMatrix& x) {
  check_dims(model.centroids.cols(), x, "cblof");
  ScoreVector scores(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    const std::size_t own = nearest_centroid(model.centroids, row);
    if (own < model.n_large) {
      scores[r] = std::sqrt(squared_distance(row, model.centroids.row(own)));
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.n_large; ++c) {
      best = std::min(best, squared_distance(row, model.centroids.row(c)));
    }
    scores[r] = std::sqrt(best);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// HBOS

std::size_t HbosHistogram::bin_of(double v) const {
  const double pos = std::floor((v - lower) / width);
  if (!(pos > 0.0)) return 0;
  const auto last = static_cast<double>(heights.size() - 1);
  return pos >= last ? heights.size() - 1 : static_cast<std::size_t>(pos);
}

HbosModel fit_hbos(const FeatureMatrix& train, const HbosParams& params) {
  if (params.bins < 2) throw Error(ErrorCode::invalid_argument, "hbos: bins must be >= 2");
  if (train.empty()) throw Error(ErrorCode::invalid_argument, "hbos: empty training matrix");
  HbosModel model;
  model.bins = params.bins;
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double lo = train(0, c), hi = train(0, c);
    for (std::size_t r = 1; r < train.rows(); ++r) {
      lo = std::min(lo, train(r, c));
      hi = std::max(hi, train(r, c));
    }
    HbosHistogram h;
    h.lower = lo;
    h.width = hi > lo ? (hi - lo) / static_cast<double>(params.bins) : 1.0;
    h.heights.resize(params.bins);  // bin_of clamps against this size
    std::vector<std::size_t> counts(params.bins, 0);
    for (std::size_t r = 0; r < train.rows(); ++r) ++counts[h.bin_of(train(r, c))];
    const double peak = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
    for (std::size_t b = 0; b < params.bins; ++b) {
      h.heights[b] = counts[b] == 0 ? kHbosFloor : static_cast<double>(counts[b]) / peak;
    }
    model.histograms.push_back(std::move(h));
  }
  return model;
}

ScoreVector score_hbos(const HbosModel& model, const FeatureMatrix& x) {
  check_dims(model.histograms.size(), x, "hbos");
  ScoreVector scores(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const auto& h = model.histograms[c];
      s += std::log2(1.0 / h.heights[h.bin_of(x(r, c))]);
    }
    scores[r] = s;
  }
  return scores;
}

}  // namespace flowsentry
