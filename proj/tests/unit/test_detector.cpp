#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "dataset.hpp"
#include "detector.hpp"
#include "error.hpp"
#include "metrics.hpp"

using namespace flowsentry;

namespace {

DetectorConfig config_for(DetectorKind kind, double contamination = 0.1) {
  DetectorConfig c;
  c.kind = kind;
  c.contamination = contamination;
  c.seed = 17;
  c.params.ocsvm.max_train_rows = 2000;
  return c;
}

double mean_where(const ScoreVector& s, const std::vector<std::uint8_t>& labels, std::uint8_t which) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (labels[i] == which) {
      sum += s[i];
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("detector kinds round-trip through their names") {
  for (auto kind : kAllDetectorKinds) CHECK(parse_detector_kind(to_string(kind)) == kind);
  CHECK_FALSE(parse_detector_kind("lof").has_value());
  CHECK(detector_kind_list() == "cblof, hbos, iforest, knn, mcd, ocsvm, pca");
}

TEST_CASE("hyperparameter keys") {
  Hyperparameters h;
  h.set("iforest.trees", "200");
  h.set("knn.k", "3");
  h.set("ocsvm.gamma", "auto");
  h.set("pca.selector", "minor");
  CHECK(h.iforest.trees == 200);
  CHECK(h.knn.k == 3);
  CHECK(h.ocsvm.gamma == 0.0);
  CHECK(h.pca.selector == PcaSelector::minor);
  CHECK_THROWS_AS(h.set("iforest.depth", "3"), Error);
  CHECK_THROWS_AS(h.set("knn.k", "three"), Error);
  CHECK_THROWS_AS(h.set("knn.k", "-1"), Error);
  for (const auto& key : Hyperparameters::keys()) CHECK(key.find('.') != std::string::npos);
}

TEST_CASE("1-D kNN model on {0, 1, 2, 10}") {
  const FeatureMatrix train(4, 1, {0.0, 1.0, 2.0, 10.0});
  auto c = config_for(DetectorKind::knn, 0.25);
  c.params.knn.k = 1;
  const auto model = fit(c, train);
  const auto s = score(model, train);
  CHECK(s == ScoreVector{1.0, 1.0, 1.0, 8.0});
  CHECK(model.threshold() == doctest::Approx(quantile({1.0, 1.0, 1.0, 8.0}, 0.75)));
  CHECK(predict(model, train) == std::vector<std::uint8_t>{0, 0, 0, 1});
  CHECK(score(model, FeatureMatrix(1, 1, std::vector<double>{10.0}))[0] == 8.0);
}

TEST_CASE("quantile follows linear interpolation") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({5, 1, 3}, 1.0) == 5.0);
  CHECK(quantile({5, 1, 3}, 0.0) == 1.0);
  CHECK(quantile({0, 10}, 0.9) == doctest::Approx(9.0));
}

TEST_CASE("contamination 0.1 on 100 train rows flags about 10") {
  const auto data = generate_synthetic(100, 0, 3, 0.0, 5);
  for (auto kind : kAllDetectorKinds) {
    CAPTURE(to_string(kind));
    const auto model = fit(config_for(kind), data.features);
    const auto flagged = predict(model, data.features);
    const auto n = std::accumulate(flagged.begin(), flagged.end(), std::size_t{0});
    CHECK(n >= 9);
    CHECK(n <= 11);
  }
}

TEST_CASE("every detector orients, is pure and deterministic") {
  const auto data = generate_synthetic(600, 60, 4, 6.0, 23);
  for (auto kind : kAllDetectorKinds) {
    CAPTURE(to_string(kind));
    const auto cfg = config_for(kind);
    const auto model = fit(cfg, data.features);
    const auto s = score(model, data.features);
    CHECK(std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); }));
    CHECK(mean_where(s, data.labels, 1) > mean_where(s, data.labels, 0));
    CHECK(score(model, data.features) == s);
    CHECK(score(fit(cfg, data.features), data.features) == s);
    CHECK(roc_auc(data.labels, s) > 0.95);

    // Duplicate rows score identically.
    const std::vector<std::size_t> rows = {3, 3, 7, 7};
    const auto dup = score(model, data.features.select_rows(rows));
    CHECK(dup[0] == dup[1]);
    CHECK(dup[2] == dup[3]);
    CHECK(dup[0] == s[3]);
  }
}

TEST_CASE("separation 6 with contamination at the attack fraction") {
  const auto data = generate_synthetic(900, 100, 8, 6.0, 31);
  for (auto kind : kAllDetectorKinds) {
    CAPTURE(to_string(kind));
    const auto model = fit(config_for(kind, 0.1), data.features);
    CHECK(accuracy(data.labels, predict(model, data.features)) > 0.9);
  }
}

TEST_CASE("fit never sees labels") {
  // Same features with different labels yield the same model and scores.
  auto a = generate_synthetic(200, 20, 3, 5.0, 4);
  auto b = a;
  std::reverse(b.labels.begin(), b.labels.end());
  for (auto kind : kAllDetectorKinds) {
    const auto cfg = config_for(kind);
    CHECK(score(fit(cfg, a.features), a.features) == score(fit(cfg, b.features), b.features));
  }
}

TEST_CASE("raising contamination never flags fewer") {
  const auto data = generate_synthetic(300, 30, 2, 4.0, 8);
  const auto model = fit(config_for(DetectorKind::hbos), data.features);
  const auto s = score(model, data.features);
  std::size_t previous = 0;
  for (double c = 0.01; c <= 0.5; c += 0.01) {
    const auto flags = threshold_scores(s, quantile(s, 1.0 - c));
    const auto n = std::accumulate(flags.begin(), flags.end(), std::size_t{0});
    CHECK(n >= previous);
    previous = n;
  }
}

TEST_CASE("scores below the threshold give no flags, ties stay benign") {
  CHECK(threshold_scores(std::vector<double>{0.1, 0.2, 0.3}, 0.3) == std::vector<std::uint8_t>{0, 0, 0});
  CHECK(threshold_scores(std::vector<double>{0.1, 0.4}, 0.3) == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("fit and score argument errors") {
  const FeatureMatrix train(4, 1, {0.0, 1.0, 2.0, 10.0});
  auto c = config_for(DetectorKind::knn);
  c.contamination = 0.0;
  CHECK_THROWS_AS(fit(c, train), Error);
  c.contamination = 0.6;
  CHECK_THROWS_AS(fit(c, train), Error);
  CHECK_THROWS_AS(fit(config_for(DetectorKind::knn), FeatureMatrix()), Error);

  const auto model = fit(config_for(DetectorKind::iforest), train);
  CHECK_THROWS_AS(score(model, FeatureMatrix(2, 3)), Error);

  c = config_for(DetectorKind::knn);
  c.params.knn.k = 4;
  try {
    fit(c, train);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("knn: fit:", 0) == 0);
  }
}

TEST_CASE("ocsvm subsampling is reported as a warning") {
  const auto data = generate_synthetic(300, 0, 2, 0.0, 3);
  auto c = config_for(DetectorKind::ocsvm);
  c.params.ocsvm.max_train_rows = 100;
  const auto model = fit(c, data.features);
  REQUIRE_FALSE(model.warnings().empty());
  CHECK(model.warnings()[0].find("100 of 300") != std::string::npos);
}
