#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "matrix.hpp"

namespace flowsentry {

using ScoreVector = std::vector<double>;

// ---------------------------------------------------------------------------
// PCA

enum class PcaSelector { all, minor };

struct PcaParams {
  PcaSelector selector = PcaSelector::all;
  // With selector = minor, components whose eigenvalue falls below this
  // value are scored (at least the smallest one is always kept).
  double variance_floor = 0.2;
};

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues[j]
  std::vector<std::size_t> selected;
  double eigenvalue_floor = 0.0;  // 1e-9 * largest eigenvalue
};

inline constexpr double kPcaRelativeFloor = 1e-9;

PcaModel fit_pca(const FeatureMatrix& train, const PcaParams& params = {});
ScoreVector score_pca(const PcaModel& model, const FeatureMatrix& x);

// Unbiased (n - 1) sample covariance of the rows.
Eigen::MatrixXd sample_covariance(const FeatureMatrix& x, Eigen::VectorXd* mean = nullptr);

// ---------------------------------------------------------------------------
// FAST-MCD

struct McdParams {
  // Subset size. 0 picks floor((n + p + 1) / 2); values in (0, 1) are a
  // fraction of n; anything else is an absolute row count.
  double h = 0.0;
  std::size_t starts = 50;
  std::size_t keep = 5;
  std::size_t max_csteps = 100;
  double tolerance = 1e-9;
};

// Log-determinants visited by one start, in C-step order.
struct CstepTrace {
  std::size_t start = 0;
  std::vector<double> log_dets;
  bool ridged = false;
};

struct McdModel {
  Eigen::VectorXd location;
  Eigen::MatrixXd scatter;
  Eigen::MatrixXd cholesky;  // lower factor of scatter
  std::size_t h = 0;
  std::vector<std::size_t> support;  // sorted row indices
  double log_det = 0.0;
  bool ridged = false;
  std::vector<CstepTrace> traces;
};

std::size_t mcd_default_h(std::size_t n, std::size_t p);

McdModel fit_mcd(const FeatureMatrix& train, const McdParams& params, std::uint64_t seed);
ScoreVector score_mcd(const McdModel& model, const FeatureMatrix& x);

// Mean and (divisor m) covariance of a row subset, as used inside C-steps.
void subset_moments(const FeatureMatrix& x, std::span<const std::size_t> rows, Eigen::VectorXd& mean,
                    Eigen::MatrixXd& cov);

}  // namespace flowsentry
