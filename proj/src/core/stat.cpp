#include "stat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "error.hpp"
#include "random.hpp"

namespace flowsentry {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> row) {
  return {row.data(), static_cast<Eigen::Index>(row.size())};
}

void check_dims(std::size_t expected, const FeatureMatrix& x, const char* who) {
  if (x.cols() != expected) {
    throw Error(ErrorCode::invalid_argument, std::string(who) + ": expected " + std::to_string(expected) +
                                                 " columns, got " + std::to_string(x.cols()));
  }
}

}  // namespace

Eigen::MatrixXd sample_covariance(const FeatureMatrix& x, Eigen::VectorXd* mean_out) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(x.values().data(), n,
                                                                                               p);
  const Eigen::VectorXd mean = m.colwise().mean().transpose();
  const Eigen::MatrixXd centered = m.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  if (mean_out) *mean_out = mean;
  return cov;
}

// ---------------------------------------------------------------------------
// PCA

PcaModel fit_pca(const FeatureMatrix& train, const PcaParams& params) {
  if (train.rows() < 2) throw Error(ErrorCode::invalid_argument, "pca: need at least 2 training rows");
  PcaModel model;
  const Eigen::MatrixXd cov = sample_covariance(train, &model.mean);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical, "pca: fit: eigendecomposition failed");

  // Eigen returns ascending order.
  const Eigen::Index p = cov.rows();
  model.eigenvalues = eig.eigenvalues().reverse();
  model.eigenvectors = eig.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < p; ++j) model.eigenvalues[j] = std::max(model.eigenvalues[j], 0.0);
  if (!(model.eigenvalues[0] > 0.0)) throw Error(ErrorCode::numerical, "pca: fit: zero covariance");
  model.eigenvalue_floor = kPcaRelativeFloor * model.eigenvalues[0];

  if (params.selector == PcaSelector::all) {
    model.selected.resize(static_cast<std::size_t>(p));
    std::iota(model.selected.begin(), model.selected.end(), std::size_t{0});
  } else {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (model.eigenvalues[j] < params.variance_floor) model.selected.push_back(static_cast<std::size_t>(j));
    }
    if (model.selected.empty()) model.selected.push_back(static_cast<std::size_t>(p - 1));
  }
  return model;
}

ScoreVector score_pca(const PcaModel& model, const FeatureMatrix& x) {
  check_dims(static_cast<std::size_t>(model.mean.size()), x, "pca");
  ScoreVector scores(x.rows());
  Eigen::VectorXd centered(model.mean.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    centered = as_vector(x.row(r)) - model.mean;
    double s = 0.0;
    for (std::size_t j : model.selected) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double proj = model.eigenvectors.col(jj).dot(centered);
      s += proj * proj / std::max(model.eigenvalues[jj], model.eigenvalue_floor);
    }
    scores[r] = s;
  }
  return scores;
}

// ---------------------------------------------------------------------------
// FAST-MCD

std::size_t mcd_default_h(std::size_t n, std::size_t p) { return (n + p + 1) / 2; }

void subset_moments(const FeatureMatrix& x, std::span<const std::size_t> rows, Eigen::VectorXd& mean,
                    Eigen::MatrixXd& cov) {
  const auto p = static_cast<Eigen::Index>(x.cols());
  mean = Eigen::VectorXd::Zero(p);
  for (auto r : rows) mean += as_vector(x.row(r));
  mean /= static_cast<double>(rows.size());
  cov = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd d(p);
  for (auto r : rows) {
    d = as_vector(x.row(r)) - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(rows.size());
}

namespace {

struct Fit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
  double log_det = 0.0;
  bool ridged = false;
};

bool factor(const Eigen::MatrixXd& cov, Eigen::MatrixXd& chol, double& log_det) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  const double lo = diag.minCoeff(), hi = diag.maxCoeff();
  if (!(lo > 0.0) || (lo * lo) / (hi * hi) < 1e-14) return false;
  chol = llt.matrixL();
  log_det = 2.0 * diag.array().log().sum();
  return true;
}

// Moments of `rows`, ridge-regularized when the covariance is (near) singular.
// Returns false if even the ridge cannot make it positive definite.
bool fit_subset(const FeatureMatrix& x, std::span<const std::size_t> rows, Fit& out) {
  subset_moments(x, rows, out.mean, out.cov);
  out.ridged = false;
  if (factor(out.cov, out.chol, out.log_det)) return true;
  const double trace = out.cov.trace();
  const auto p = out.cov.rows();
  const double ridge = trace > 0.0 ? 1e-6 * trace / static_cast<double>(p) : 1e-6;
  out.cov.diagonal().array() += ridge;
  out.ridged = true;
  return factor(out.cov, out.chol, out.log_det);
}

Eigen::VectorXd mahalanobis_sq(const FeatureMatrix& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol) {
  const std::size_t n = x.rows();
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  Eigen::VectorXd v(mean.size());
  const auto lower = chol.triangularView<Eigen::Lower>();
  for (std::size_t r = 0; r < n; ++r) {
    v = as_vector(x.row(r)) - mean;
    lower.solveInPlace(v);
    d[static_cast<Eigen::Index>(r)] = v.squaredNorm();
  }
  return d;
}

// Rows with the h smallest distances, ties to the lower index; sorted.
std::vector<std::size_t> smallest_h(const Eigen::VectorXd& d, std::size_t h) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(d.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const double da = d[static_cast<Eigen::Index>(a)], db = d[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h - 1), idx.end(), less);
  idx.resize(h);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct Candidate {
  std::size_t start = 0;
  std::vector<std::size_t> subset;
  Fit fit;
};

}  // namespace

McdModel fit_mcd(const FeatureMatrix& train, const McdParams& params, std::uint64_t seed) {
  const std::size_t n = train.rows(), p = train.cols();
  if (n <= p + 1) {
    throw Error(ErrorCode::invalid_argument, "mcd: need more than p + 1 = " + std::to_string(p + 1) + " rows");
  }
  if (params.starts == 0 || params.keep == 0) {
    throw Error(ErrorCode::invalid_argument, "mcd: starts and keep must be >= 1");
  }
  std::size_t h = mcd_default_h(n, p);
  if (params.h > 0.0 && params.h < 1.0) {
    h = static_cast<std::size_t>(std::floor(params.h * static_cast<double>(n)));
  } else if (params.h >= 1.0) {
    h = static_cast<std::size_t>(params.h);
  }
  if (h <= p || h > n) {
    throw Error(ErrorCode::invalid_argument, "mcd: h = " + std::to_string(h) + " must lie in (p, n]");
  }

  McdModel model;
  model.h = h;
  std::vector<Candidate> candidates;
  candidates.reserve(params.starts);

  for (std::size_t s = 0; s < params.starts; ++s) {
    Rng rng(derive_seed(seed, s));
    // Random (p+1)-subset, grown one row at a time until non-singular; past h
    // rows the ridge takes over.
    auto order = permutation(n, rng);
    std::size_t m = p + 1;
    Fit fit;
    bool ok = false;
    while (m <= h) {
      std::span<const std::size_t> rows(order.data(), m);
      subset_moments(train, rows, fit.mean, fit.cov);
      if (factor(fit.cov, fit.chol, fit.log_det)) {
        ok = true;
        break;
      }
      ++m;
    }
    if (!ok && !fit_subset(train, std::span<const std::size_t>(order.data(), p + 1), fit)) continue;

    CstepTrace trace;
    trace.start = s;
    std::vector<std::size_t> subset;
    bool usable = true;
    for (int step = 0; step < 2; ++step) {
      subset = smallest_h(mahalanobis_sq(train, fit.mean, fit.chol), h);
      if (!fit_subset(train, subset, fit)) {
        usable = false;
        break;
      }
      trace.ridged = trace.ridged || fit.ridged;
      trace.log_dets.push_back(fit.log_det);
    }
    model.traces.push_back(std::move(trace));
    if (usable) candidates.push_back({s, std::move(subset), std::move(fit)});
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::numerical, "mcd: fit: every candidate covariance is singular");
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.fit.log_det < b.fit.log_det; });
  candidates.resize(std::min(candidates.size(), params.keep));

  auto trace_of = [&](std::size_t start) -> CstepTrace& {
    for (auto& t : model.traces) {
      if (t.start == start) return t;
    }
    return model.traces.front();
  };

  for (auto& cand : candidates) {
    auto& trace = trace_of(cand.start);
    for (std::size_t it = 0; it < params.max_csteps; ++it) {
      auto next = smallest_h(mahalanobis_sq(train, cand.fit.mean, cand.fit.chol), h);
      if (next == cand.subset) break;
      Fit fit;
      if (!fit_subset(train, next, fit)) break;
      const double change = std::abs(std::expm1(fit.log_det - cand.fit.log_det));
      trace.ridged = trace.ridged || fit.ridged;
      trace.log_dets.push_back(fit.log_det);
      cand.subset = std::move(next);
      cand.fit = std::move(fit);
      if (change < params.tolerance) break;
    }
  }

  const auto best = std::min_element(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return a.fit.log_det < b.fit.log_det;
  });
  model.location = best->fit.mean;
  model.scatter = best->fit.cov;
  model.cholesky = best->fit.chol;
  model.log_det = best->fit.log_det;
  model.ridged = best->fit.ridged;
  model.support = best->subset;
  return model;
}

ScoreVector score_mcd(const McdModel& model, const FeatureMatrix& x) {
  check_dims(static_cast<std::size_t>(model.location.size()), x, "mcd");
  const Eigen::VectorXd d = mahalanobis_sq(x, model.location, model.cholesky);
  return ScoreVector(d.data(), d.data() + d.size());
}

}  // namespace flowsentry
