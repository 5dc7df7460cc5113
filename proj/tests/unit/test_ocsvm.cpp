#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dataset.hpp"
#include "error.hpp"
#include "ocsvm.hpp"
#include "oracles.hpp"

using namespace flowsentry;

namespace {

FeatureMatrix gaussian(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureMatrix x(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) x(r, c) = normal(rng);
  }
  return x;
}

// Gram matrix computed without the library kernel.
oracle::Matrix gram(const FeatureMatrix& x, double gamma) {
  oracle::Matrix q(x.rows(), std::vector<double>(x.rows()));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.rows(); ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) d2 += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      q[i][j] = std::exp(-gamma * d2);
    }
  }
  return q;
}

void check_feasible(const std::vector<double>& alpha, double cap) {
  const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  REQUIRE(std::abs(sum - 1.0) <= 1e-6);
  for (double a : alpha) {
    REQUIRE(a >= -1e-9);
    REQUIRE(a <= cap + 1e-9);
  }
}

std::vector<std::size_t> ranking(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  return idx;
}

}  // namespace

TEST_CASE("kernel symmetry and positivity") {
  const auto x = gaussian(20, 3, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(rbf_kernel(x.row(i), x.row(i), 0.7) == 1.0);
    for (std::size_t j = 0; j < 20; ++j) {
      CHECK(rbf_kernel(x.row(i), x.row(j), 0.7) == rbf_kernel(x.row(j), x.row(i), 0.7));
      CHECK(rbf_kernel(x.row(i), x.row(j), 0.7) > 0.0);
    }
  }
}

TEST_CASE("auto gamma uses the mean column variance") {
  // Column variances 1 and 4 (population), mean 2.5, p = 2.
  const FeatureMatrix x(2, 2, {-1.0, -2.0, 1.0, 2.0});
  CHECK(auto_gamma(x) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("nu = 1 forces uniform weights") {
  const auto x = gaussian(30, 2, 2);
  const auto sol = solve_ocsvm_dual(x, 1.0, 0.5, 1e-3, 100000);
  for (double a : sol.alpha) CHECK(a == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("two identical rows split the weight evenly") {
  const FeatureMatrix x(2, 2, {1.0, 2.0, 1.0, 2.0});
  const auto sol = solve_ocsvm_dual(x, 0.5, 1.0, 1e-3, 100000);
  CHECK(sol.alpha[0] == doctest::Approx(0.5));
  CHECK(sol.alpha[1] == doctest::Approx(0.5));
}

TEST_CASE("solver objective matches the dense QP oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::size_t n = 6 + seed;  // 6..13
    const double nu = std::array<double, 4>{0.2, 0.35, 0.5, 0.8}[seed % 4];
    const double gamma = 0.5;
    const auto x = gaussian(n, 2, seed + 40);
    const auto q = gram(x, gamma);
    const double cap = 1.0 / (nu * static_cast<double>(n));
    const auto ref = oracle::capped_simplex_qp(q, cap, 40000);
    const auto sol = solve_ocsvm_dual(x, nu, gamma, 1e-9, 100000);
    CAPTURE(n);
    CAPTURE(nu);
    check_feasible(sol.alpha, cap);
    CHECK(std::abs(sol.objective - ref.objective) <= 1e-4);
  }
}

TEST_CASE("n = 12 fixture ranking matches the oracle") {
  const auto x = gaussian(12, 2, 12);
  const double nu = 0.5, gamma = 0.5;
  const auto ref = oracle::capped_simplex_qp(gram(x, gamma), 1.0 / (nu * 12.0));

  OcsvmParams params;
  params.nu = nu;
  params.gamma = gamma;
  params.tol = 1e-9;
  const auto model = fit_ocsvm(x, params, 1);
  CHECK(std::abs(model.objective - ref.objective) <= 1e-4);

  const auto query = gaussian(25, 2, 99);
  const auto s = score_ocsvm(model, query);
  std::vector<double> oracle_scores(query.rows(), 0.0);
  for (std::size_t r = 0; r < query.rows(); ++r) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 2; ++c) d2 += (x(i, c) - query(r, c)) * (x(i, c) - query(r, c));
      oracle_scores[r] -= ref.alpha[i] * std::exp(-gamma * d2);
    }
  }
  CHECK(ranking(s) == ranking(oracle_scores));
}

TEST_CASE("objective trace never increases") {
  const auto x = gaussian(150, 3, 5);
  const auto sol = solve_ocsvm_dual(x, 0.3, 0.4, 1e-6, 100000, true);
  REQUIRE_FALSE(sol.objective_trace.empty());
  for (std::size_t i = 1; i < sol.objective_trace.size(); ++i) {
    REQUIRE(sol.objective_trace[i] <= sol.objective_trace[i - 1] + 1e-15);
  }
  CHECK(sol.objective_trace.back() == doctest::Approx(sol.objective).epsilon(1e-9));
}

TEST_CASE("every fit is feasible, converged or not") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = gaussian(80 + 10 * seed, 2 + seed % 3, seed);
    OcsvmParams params;
    params.nu = 0.1 + 0.08 * static_cast<double>(seed);
    params.max_updates = seed % 2 ? 100000 : 7;
    const auto m = fit_ocsvm(x, params, seed);
    if (params.max_updates == 7) CHECK_FALSE(m.converged);
    check_feasible(m.alphas, m.upper_bound);
  }
}

TEST_CASE("scores near the margin and far away") {
  const auto x = gaussian(300, 2, 7);
  OcsvmParams params;
  params.gamma = 0.5;
  params.tol = 1e-6;
  const auto m = fit_ocsvm(x, params, 1);
  REQUIRE(m.converged);
  const auto s = score_ocsvm(m, m.support_rows);
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    if (m.alphas[i] > 1e-9 && m.alphas[i] < m.upper_bound - 1e-9) CHECK(std::abs(s[i]) <= 1e-4);
  }
  const auto far = score_ocsvm(m, FeatureMatrix(1, 2, {100.0, 100.0}));
  CHECK(far[0] == doctest::Approx(m.rho).epsilon(1e-12));
}

TEST_CASE("nu bounds the outside fraction") {
  for (double nu : {0.1, 0.3, 0.5}) {
    const std::size_t n = 400;
    const auto x = gaussian(n, 3, static_cast<std::uint64_t>(nu * 100));
    OcsvmParams params;
    params.nu = nu;
    const auto m = fit_ocsvm(x, params, 2);
    const auto s = score_ocsvm(m, x);
    const auto outside = std::count_if(s.begin(), s.end(), [](double v) { return v > 0.0; });
    CHECK(static_cast<double>(outside) / n <= nu + 5.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("training subsample cap") {
  const auto x = gaussian(500, 2, 3);
  OcsvmParams params;
  params.max_train_rows = 120;
  const auto m = fit_ocsvm(x, params, 4);
  CHECK(m.subsampled);
  CHECK(m.rows_used == 120);
  CHECK(m.upper_bound == doctest::Approx(1.0 / (0.5 * 120)));
  const auto again = fit_ocsvm(x, params, 4);
  CHECK(score_ocsvm(m, x) == score_ocsvm(again, x));
}

TEST_CASE("ocsvm argument errors") {
  const auto x = gaussian(10, 2, 1);
  OcsvmParams params;
  params.nu = 0.0;
  CHECK_THROWS_AS(fit_ocsvm(x, params, 1), Error);
  params.nu = 1.5;
  CHECK_THROWS_AS(fit_ocsvm(x, params, 1), Error);
  CHECK_THROWS_AS(fit_ocsvm(FeatureMatrix(1, 2), {}, 1), Error);
}
