#include "ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "random.hpp"

namespace flowsentry {

double auto_gamma(const FeatureMatrix& train) {
  const std::size_t n = train.rows(), p = train.cols();
  double total = 0.0;
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += train(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (train(r, c) - mean) * (train(r, c) - mean);
    total += ss / static_cast<double>(n);
  }
  const double mean_var = total / static_cast<double>(p);
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(p) * mean_var) : 1.0;
}

OcsvmSolution solve_ocsvm_dual(const FeatureMatrix& x, double nu, double gamma, double tol,
                               std::size_t max_updates, bool record_trace) {
  const std::size_t n = x.rows();
  const double bound = 1.0 / (nu * static_cast<double>(n));
  OcsvmSolution sol;
  auto& alpha = sol.alpha;
  alpha.assign(n, 0.0);

  // Uniform start: always feasible since 1/n <= bound, and symmetric in the rows.
  alpha.assign(n, 1.0 / static_cast<double>(n));

  std::vector<double> grad(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) grad[k] += alpha[j] * rbf_kernel(x.row(j), x.row(k), gamma);
  }
  double objective = 0.0;
  for (std::size_t k = 0; k < n; ++k) objective += 0.5 * alpha[k] * grad[k];

  std::vector<double> ki(n), kj(n);
  for (;;) {
    std::size_t up = n, low = n;
    double g_up = std::numeric_limits<double>::infinity();
    double g_low = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] < bound && grad[k] < g_up) {
        g_up = grad[k];
        up = k;
      }
      if (alpha[k] > 0.0 && grad[k] > g_low) {
        g_low = grad[k];
        low = k;
      }
    }
    sol.violation = (up == n || low == n) ? 0.0 : g_low - g_up;
    if (sol.violation < tol) {
      sol.converged = true;
      break;
    }
    if (sol.updates >= max_updates) break;

    for (std::size_t k = 0; k < n; ++k) {
      ki[k] = rbf_kernel(x.row(up), x.row(k), gamma);
      kj[k] = rbf_kernel(x.row(low), x.row(k), gamma);
    }
    const double curvature = ki[up] + kj[low] - 2.0 * ki[low];
    const double eta = curvature > 1e-12 ? curvature : 1e-12;
    double step = sol.violation / eta;
    const double room_up = bound - alpha[up];
    const double room_low = alpha[low];
    if (step >= room_up || step >= room_low) {
      if (room_up <= room_low) {
        step = room_up;
        alpha[up] = bound;
        alpha[low] = room_low - step <= 0.0 ? 0.0 : alpha[low] - step;
      } else {
        step = room_low;
        alpha[low] = 0.0;
        alpha[up] += step;
      }
    } else {
      alpha[up] += step;
      alpha[low] -= step;
    }
    objective += step * (grad[up] - grad[low]) + 0.5 * step * step * curvature;
    for (std::size_t k = 0; k < n; ++k) grad[k] += step * (ki[k] - kj[k]);
    ++sol.updates;
    if (record_trace) sol.objective_trace.push_back(objective);
  }

  sol.objective = 0.0;
  for (std::size_t k = 0; k < n; ++k) sol.objective += 0.5 * alpha[k] * grad[k];

  // f(x_i) = grad_i - rho vanishes on margin vectors.
  double margin_sum = 0.0;
  std::size_t margin_count = 0;
  double max_bounded = -std::numeric_limits<double>::infinity();
  double min_free = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 0.0 && alpha[k] < bound) {
      margin_sum += grad[k];
      ++margin_count;
    } else if (alpha[k] >= bound) {
      max_bounded = std::max(max_bounded, grad[k]);
    } else {
      min_free = std::min(min_free, grad[k]);
    }
  }
  if (margin_count > 0) {
    sol.rho = margin_sum / static_cast<double>(margin_count);
  } else if (std::isfinite(max_bounded) && std::isfinite(min_free)) {
    sol.rho = 0.5 * (max_bounded + min_free);
  } else {
    sol.rho = std::isfinite(max_bounded) ? max_bounded : min_free;
  }
  return sol;
}

OcsvmModel fit_ocsvm(const FeatureMatrix& train, const OcsvmParams& params, std::uint64_t seed) {
  if (train.rows() < 2) throw Error(ErrorCode::invalid_argument, "ocsvm: need at least 2 training rows");
  if (!(params.nu > 0.0 && params.nu <= 1.0)) throw Error(ErrorCode::invalid_argument, "ocsvm: nu must lie in (0, 1]");
  if (params.max_train_rows < 2) throw Error(ErrorCode::invalid_argument, "ocsvm: max_train_rows must be >= 2");

  OcsvmModel model;
  model.nu = params.nu;
  const FeatureMatrix* x = &train;
  FeatureMatrix reduced;
  if (train.rows() > params.max_train_rows) {
    Rng rng(seed);
    auto rows = sample_without_replacement(train.rows(), params.max_train_rows, rng);
    std::sort(rows.begin(), rows.end());
    reduced = train.select_rows(rows);
    x = &reduced;
    model.subsampled = true;
  }
  model.rows_used = x->rows();
  model.gamma = params.gamma > 0.0 ? params.gamma : auto_gamma(*x);
  model.upper_bound = 1.0 / (params.nu * static_cast<double>(x->rows()));

  auto sol = solve_ocsvm_dual(*x, params.nu, model.gamma, params.tol, params.max_updates, params.record_trace);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha[i] > 0.0) {
      support.push_back(i);
      model.alphas.push_back(sol.alpha[i]);
    }
  }
  model.support_rows = x->select_rows(support);
  model.rho = sol.rho;
  model.objective = sol.objective;
  model.violation = sol.violation;
  model.updates = sol.updates;
  model.converged = sol.converged;
  model.objective_trace = std::move(sol.objective_trace);
  return model;
}

ScoreVector score_ocsvm(const OcsvmModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.support_rows.cols()) {
    throw Error(ErrorCode::invalid_argument, "ocsvm: expected " + std::to_string(model.support_rows.cols()) +
                                                 " columns, got " + std::to_string(x.cols()));
  }
  ScoreVector scores(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double f = 0.0;
    for (std::size_t i = 0; i < model.alphas.size(); ++i) {
      f += model.alphas[i] * rbf_kernel(model.support_rows.row(i), x.row(r), model.gamma);
    }
    scores[r] = model.rho - f;
  }
  return scores;
}

}  // namespace flowsentry
