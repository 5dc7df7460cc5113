#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "matrix.hpp"

namespace flowsentry {

using ScoreVector = std::vector<double>;

struct OcsvmParams {
  double nu = 0.5;
  double gamma = 0.0;  // <= 0 selects 1 / (p * mean column variance)
  double tol = 1e-3;
  std::size_t max_updates = 100000;
  // Larger training sets are uniformly subsampled before solving.
  std::size_t max_train_rows = 20000;
  bool record_trace = false;
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

double auto_gamma(const FeatureMatrix& train);

// Solution of  min 1/2 a'Qa  s.t.  0 <= a_i <= 1/(nu n),  sum a = 1
// with Q_ij = K(x_i, x_j).
struct OcsvmSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  double objective = 0.0;
  double violation = 0.0;
  std::size_t updates = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // after each pair update, when recorded
};

OcsvmSolution solve_ocsvm_dual(const FeatureMatrix& x, double nu, double gamma, double tol,
                               std::size_t max_updates, bool record_trace = false);

struct OcsvmModel {
  FeatureMatrix support_rows;
  std::vector<double> alphas;
  double rho = 0.0;
  double gamma = 1.0;
  double nu = 0.5;
  double upper_bound = 0.0;  // 1 / (nu * n_used)
  double objective = 0.0;
  double violation = 0.0;
  std::size_t updates = 0;
  bool converged = false;
  std::size_t rows_used = 0;
  bool subsampled = false;
  std::vector<double> objective_trace;
};

OcsvmModel fit_ocsvm(const FeatureMatrix& train, const OcsvmParams& params, std::uint64_t seed);

// rho - sum_i alpha_i K(x_i, x): the negated decision function.
ScoreVector score_ocsvm(const OcsvmModel& model, const FeatureMatrix& x);

}  // namespace flowsentry
