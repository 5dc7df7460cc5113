#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dataset.hpp"
#include "error.hpp"
#include "random.hpp"

using namespace flowsentry;

namespace {

LabeledDataset make_dataset(std::size_t n_benign, std::size_t n_attack, std::size_t p = 1) {
  LabeledDataset d;
  const std::size_t n = n_benign + n_attack;
  std::vector<double> values(n * p);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
  d.features = FeatureMatrix(n, p, std::move(values));
  d.labels.assign(n, 0);
  for (std::size_t i = n_benign; i < n; ++i) d.labels[i] = 1;
  return d;
}

double attack_fraction(const LabeledDataset& d) {
  return static_cast<double>(d.attack_count()) / static_cast<double>(d.rows());
}

}  // namespace

TEST_CASE("read_csv maps the attack token to 1") {
  std::istringstream in("a,b,Label\n1,2,Attack\n3,4,Benign\n5,6,Attack\n");
  const auto d = read_csv(in);
  CHECK(d.labels == std::vector<std::uint8_t>{1, 0, 1});
  CHECK(d.features.cols() == 2);
  CHECK(d.features.column_names() == std::vector<std::string>{"a", "b"});
  CHECK(d.features(2, 1) == 6.0);
}

TEST_CASE("read_csv drops rows with non-finite features and reports the count") {
  std::istringstream in("Flow Bytes/s, Tot Fwd Pkts,Label\n1.5,2,Benign\ninf,3,Attack\n2.5,4,Benign\n");
  LoadReport report;
  const auto d = read_csv(in, {}, &report);
  CHECK(report.rows_dropped == 1);
  CHECK(report.rows_read == 3);
  CHECK(d.rows() == 2);
  CHECK(d.features.column_names()[1] == "Tot Fwd Pkts");
  CHECK(d.features.all_finite());
}

TEST_CASE("read_csv honours label options and ignored columns") {
  std::istringstream in("id,x,class\nflow-1,1,DDoS\nflow-2,2,BENIGN\n");
  CsvOptions opt;
  opt.label_column = "class";
  opt.attack_value = "DDoS";
  opt.ignore_columns = {"id"};
  const auto d = read_csv(in, opt);
  CHECK(d.labels == std::vector<std::uint8_t>{1, 0});
  CHECK(d.features.cols() == 1);
}

TEST_CASE("read_csv errors") {
  SUBCASE("missing label column") {
    std::istringstream in("a,b\n1,2\n");
    CHECK_THROWS_AS(read_csv(in), Error);
  }
  SUBCASE("no row survives sanitization") {
    std::istringstream in("a,Label\nnan,Attack\n,Benign\n");
    CHECK_THROWS_AS(read_csv(in), Error);
  }
  SUBCASE("junk text in a numeric column") {
    std::istringstream in("a,Label\nhello,Attack\n");
    CHECK_THROWS_AS(read_csv(in), Error);
  }
  SUBCASE("missing file") {
    try {
      load_csv("/nonexistent/flows.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
    }
  }
}

TEST_CASE("synthetic CSV round-trips exactly") {
  const auto d = generate_synthetic(50, 7, 4, 3.0, 11);
  std::stringstream buf;
  write_csv(d, buf);
  const auto back = read_csv(buf);
  CHECK(back == d);
}

TEST_CASE("plan_resample reproduces the listing arithmetic") {
  // N_benign / (0.9 / 0.1) = 1000 attack rows.
  const auto plan = plan_resample(9000, 5000, 0.9);
  CHECK(plan.n_benign == 9000);
  CHECK(plan.n_attack == 1000);

  const auto even = plan_resample(100, 100, 0.5);
  CHECK(even.n_benign == 100);
  CHECK(even.n_attack == 100);
}

TEST_CASE("plan_resample mirrors the formula when attack rows run out") {
  // Source counts: 464,976 flows, 17,462 of them attacks (3.76 %).
  const std::size_t total = 464976, attacks = 17462;
  CHECK(std::abs(100.0 * attacks / total - 3.76) < 0.005);
  const auto plan = plan_resample(total - attacks, attacks, 0.2);
  CHECK(plan.n_attack == attacks);
  // 17,462 * (0.2 / 0.8) = 4,365.5
  CHECK(plan.n_benign >= 4365);
  CHECK(plan.n_benign <= 4366);

  // Benign ratio 0.01 keeps every attack and about 176 benign rows.
  const auto low = plan_resample(total - attacks, attacks, 0.01);
  CHECK(low.n_attack == attacks);
  CHECK(low.n_benign == 176);
}

TEST_CASE("resample_to_ratio counts labels of the mirrored case") {
  const auto d = make_dataset(447514, 17462);
  const auto r = resample_to_ratio(d, 0.2, 5);
  CHECK(r.attack_count() == 17462);
  const auto benign = r.rows() - r.attack_count();
  CHECK(benign >= 4365);
  CHECK(benign <= 4366);
}

TEST_CASE("resample_to_ratio meets the target within 1/n") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nb = 1 + uniform_index(rng, 3000);
    const std::size_t na = 1 + uniform_index(rng, 3000);
    const double ratio = 0.01 + 0.98 * uniform_open(rng);
    const auto d = make_dataset(nb, na);
    LabeledDataset r;
    try {
      r = resample_to_ratio(d, ratio, static_cast<std::uint64_t>(trial));
    } catch (const InfeasibleRatio& e) {
      // Only refused when one class would round to zero rows.
      const double target_attack = 1.0 - ratio;
      CHECK((nb * target_attack / ratio < 0.5 || na * ratio / target_attack < 0.5));
      CHECK(e.nearest_benign_ratio() > 0.0);
      CHECK(e.nearest_benign_ratio() < 1.0);
      continue;
    }
    CHECK(std::abs(attack_fraction(r) - (1.0 - ratio)) <= 1.0 / static_cast<double>(r.rows()));
  }
}

TEST_CASE("infeasible ratio is an explicit error carrying the nearest ratio") {
  const auto d = make_dataset(10, 10);
  try {
    resample_to_ratio(d, 0.999, 1);
    FAIL("expected InfeasibleRatio");
  } catch (const InfeasibleRatio& e) {
    CHECK(e.nearest_benign_ratio() == doctest::Approx(10.0 / 11.0));
  }
}

TEST_CASE("resample_to_ratio is deterministic and samples without replacement") {
  const auto d = make_dataset(500, 300, 2);
  const auto a = resample_to_ratio(d, 0.9, 42);
  const auto b = resample_to_ratio(d, 0.9, 42);
  CHECK(a == b);
  std::set<double> first_col;
  for (std::size_t r = 0; r < a.rows(); ++r) first_col.insert(a.features(r, 0));
  CHECK(first_col.size() == a.rows());
  CHECK(a.rows() - a.attack_count() == 500);
  CHECK(a.attack_count() == 56);  // round(500 / 9)
}

TEST_CASE("drop_constant_columns") {
  LabeledDataset d;
  d.features = FeatureMatrix(3, 3, {1, 0, 7, 2, 0, 8, 3, 0, 7}, {"a", "zero", "c"});
  d.labels = {0, 1, 0};

  SUBCASE("removes an all-zero column") {
    std::vector<std::string> dropped;
    const auto out = drop_constant_columns(d, &dropped);
    CHECK(out.features.column_names() == std::vector<std::string>{"a", "c"});
    CHECK(dropped == std::vector<std::string>{"zero"});
    CHECK(drop_constant_columns(out) == out);
  }
  SUBCASE("identity without constant columns") {
    const auto once = drop_constant_columns(d);
    CHECK(drop_constant_columns(once) == once);
  }
  SUBCASE("membership is decided on the rows given") {
    // Column c varies over all rows but not over rows {0, 2}.
    const std::vector<std::size_t> rows = {0, 2};
    const auto sub = drop_constant_columns(d.select_rows(rows));
    CHECK(sub.features.column_names() == std::vector<std::string>{"a"});
  }
  SUBCASE("all constant is an error") {
    LabeledDataset flat;
    flat.features = FeatureMatrix(2, 1, {4, 4});
    flat.labels = {0, 1};
    CHECK_THROWS_AS(drop_constant_columns(flat), Error);
  }
}

TEST_CASE("split_train_test sizes and determinism") {
  const auto d = make_dataset(6, 4);
  const auto s = split_train_test(d, 0.7, 200);
  CHECK(s.train.rows() == 7);
  CHECK(s.test.rows() == 3);
  const auto again = split_train_test(d, 0.7, 200);
  CHECK(s.train_rows == again.train_rows);
  CHECK(s.test_rows == again.test_rows);

  CHECK_THROWS_AS(split_train_test(d, 0.0, 1), Error);
  CHECK_THROWS_AS(split_train_test(make_dataset(1, 1), 0.9, 1), Error);
}

TEST_CASE("split_train_test partitions the rows for 1000 seeds") {
  const auto d = make_dataset(30, 20);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = split_train_test(d, 0.7, seed);
    std::set<std::size_t> all(s.train_rows.begin(), s.train_rows.end());
    REQUIRE(all.size() == s.train_rows.size());
    for (auto r : s.test_rows) REQUIRE(all.insert(r).second);
    REQUIRE(all.size() == 50);
    REQUIRE(s.train_rows.size() == 35);
  }
}

TEST_CASE("split fraction at source scale") {
  // Ratio 0.9 over the source counts: 17,462 attacks and 157,158 benign rows.
  const auto plan = plan_resample(464976 - 17462, 17462, 0.9);
  CHECK(plan.n_benign == 157158);
  const auto d = make_dataset(plan.n_benign, plan.n_attack);
  const auto s = split_train_test(d, 0.7, 200);
  const double frac = static_cast<double>(s.train.rows()) / static_cast<double>(d.rows());
  CHECK(frac >= 0.699);
  CHECK(frac <= 0.701);
}

TEST_CASE("standardizer") {
  SUBCASE("two-point column") {
    const FeatureMatrix x(2, 1, {0.0, 2.0});
    const auto s = Standardizer::fit(x);
    CHECK(s.means()[0] == 1.0);
    CHECK(s.stddevs()[0] == 1.0);
    const auto z = s.apply(x);
    CHECK(z(0, 0) == -1.0);
    CHECK(z(1, 0) == 1.0);
  }
  SUBCASE("test rows use train statistics") {
    const FeatureMatrix train(4, 1, {1.0, 3.0, 5.0, 7.0});  // mean 4, sd sqrt(5)
    const FeatureMatrix test(2, 1, {14.0, 4.0});
    const auto z = Standardizer::fit(train).apply(test);
    CHECK(z(0, 0) == doctest::Approx(10.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(z(1, 0) == 0.0);
  }
  SUBCASE("train moments and round trip") {
    const auto d = generate_synthetic(300, 40, 5, 4.0, 9);
    const auto s = Standardizer::fit(d.features);
    const auto z = s.apply(d.features);
    for (std::size_t c = 0; c < z.cols(); ++c) {
      double m = 0.0, v = 0.0;
      for (std::size_t r = 0; r < z.rows(); ++r) m += z(r, c);
      m /= static_cast<double>(z.rows());
      for (std::size_t r = 0; r < z.rows(); ++r) v += (z(r, c) - m) * (z(r, c) - m);
      v /= static_cast<double>(z.rows());
      CHECK(std::abs(m) < 1e-9);
      CHECK(std::abs(v - 1.0) < 1e-6);
    }
    const auto back = s.invert(z);
    for (std::size_t i = 0; i < back.values().size(); ++i) {
      const double orig = d.features.values()[i];
      CHECK(std::abs(back.values()[i] - orig) <= 1e-9 * std::max(1.0, std::abs(orig)));
    }
  }
  SUBCASE("constant columns pass through") {
    const FeatureMatrix x(3, 2, {1.0, 5.0, 2.0, 5.0, 3.0, 5.0});
    const auto s = Standardizer::fit(x);
    CHECK(s.constant_columns() == std::vector<std::size_t>{1});
    CHECK(s.apply(x)(0, 1) == 5.0);
  }
  SUBCASE("shape mismatch") {
    const auto s = Standardizer::fit(FeatureMatrix(2, 2, {0, 1, 2, 3}));
    CHECK_THROWS_AS(s.apply(FeatureMatrix(1, 3)), Error);
  }
}

TEST_CASE("generate_synthetic") {
  const auto d = generate_synthetic(200, 30, 3, 6.0, 7);
  CHECK(d.rows() == 230);
  CHECK(d.attack_count() == 30);
  CHECK(d == generate_synthetic(200, 30, 3, 6.0, 7));
  CHECK_FALSE(d == generate_synthetic(200, 30, 3, 6.0, 8));
  CHECK_THROWS_AS(generate_synthetic(0, 1, 1, 1.0, 1), Error);
}

TEST_CASE("feature matrix rejects duplicate column names") {
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1.0, 2.0}, {"a", "a"}), Error);
}
