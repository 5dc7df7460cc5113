#include "detector.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "error.hpp"
#include "text.hpp"

namespace flowsentry {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::cblof: return "cblof";
    case DetectorKind::hbos: return "hbos";
    case DetectorKind::iforest: return "iforest";
    case DetectorKind::knn: return "knn";
    case DetectorKind::mcd: return "mcd";
    case DetectorKind::ocsvm: return "ocsvm";
    case DetectorKind::pca: return "pca";
  }
  return "unknown";
}

std::optional<DetectorKind> parse_detector_kind(std::string_view name) {
  for (auto k : kAllDetectorKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string detector_kind_list() {
  std::string out;
  for (auto k : kAllDetectorKinds) {
    if (!out.empty()) out += ", ";
    out += to_string(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter overrides

namespace {

double to_real(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v)) {
    throw Error(ErrorCode::invalid_argument, std::string(key) + ": expected a number, got '" + std::string(value) + "'");
  }
  return *v;
}

std::size_t to_count(std::string_view key, std::string_view value) {
  const double v = to_real(key, value);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) {
    throw Error(ErrorCode::invalid_argument,
                std::string(key) + ": expected a non-negative integer, got '" + std::string(value) + "'");
  }
  return static_cast<std::size_t>(v);
}

using Setter = std::function<void(Hyperparameters&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"knn.k", [](auto& h, auto k, auto v) { h.knn.k = to_count(k, v); }},
      {"cblof.k_clusters", [](auto& h, auto k, auto v) { h.cblof.k_clusters = to_count(k, v); }},
      {"cblof.alpha", [](auto& h, auto k, auto v) { h.cblof.alpha = to_real(k, v); }},
      {"cblof.beta", [](auto& h, auto k, auto v) { h.cblof.beta = to_real(k, v); }},
      {"hbos.bins", [](auto& h, auto k, auto v) { h.hbos.bins = to_count(k, v); }},
      {"iforest.trees", [](auto& h, auto k, auto v) { h.iforest.trees = to_count(k, v); }},
      {"iforest.subsample", [](auto& h, auto k, auto v) { h.iforest.subsample = to_count(k, v); }},
      {"pca.selector",
       [](auto& h, auto k, auto v) {
         if (v == "all") {
           h.pca.selector = PcaSelector::all;
         } else if (v == "minor") {
           h.pca.selector = PcaSelector::minor;
         } else {
           throw Error(ErrorCode::invalid_argument, std::string(k) + ": expected 'all' or 'minor'");
         }
       }},
      {"pca.variance_floor", [](auto& h, auto k, auto v) { h.pca.variance_floor = to_real(k, v); }},
      {"mcd.h", [](auto& h, auto k, auto v) { h.mcd.h = to_real(k, v); }},
      {"mcd.starts", [](auto& h, auto k, auto v) { h.mcd.starts = to_count(k, v); }},
      {"mcd.keep", [](auto& h, auto k, auto v) { h.mcd.keep = to_count(k, v); }},
      {"ocsvm.nu", [](auto& h, auto k, auto v) { h.ocsvm.nu = to_real(k, v); }},
      {"ocsvm.gamma",
       [](auto& h, auto k, auto v) { h.ocsvm.gamma = v == "auto" ? 0.0 : to_real(k, v); }},
      {"ocsvm.tol", [](auto& h, auto k, auto v) { h.ocsvm.tol = to_real(k, v); }},
      {"ocsvm.max_updates", [](auto& h, auto k, auto v) { h.ocsvm.max_updates = to_count(k, v); }},
      {"ocsvm.max_train_rows", [](auto& h, auto k, auto v) { h.ocsvm.max_train_rows = to_count(k, v); }},
  };
  return table;
}

}  // namespace

void Hyperparameters::set(std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw Error(ErrorCode::invalid_argument, "unknown hyperparameter '" + std::string(key) + "'");
  }
  it->second(*this, key, trim(value));
}

const std::vector<std::string>& Hyperparameters::keys() {
  static const std::vector<std::string> all = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return all;
}

// ---------------------------------------------------------------------------

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "quantile of an empty vector");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

ScoreVector score_state(const FittedState& state, const FeatureMatrix& x) {
  return std::visit(
      [&](const auto& m) -> ScoreVector {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CblofModel>) return score_cblof(m, x);
        if constexpr (std::is_same_v<M, HbosModel>) return score_hbos(m, x);
        if constexpr (std::is_same_v<M, IforestModel>) return score_iforest(m, x);
        if constexpr (std::is_same_v<M, KnnModel>) return score_knn(m, x);
        if constexpr (std::is_same_v<M, McdModel>) return score_mcd(m, x);
        if constexpr (std::is_same_v<M, OcsvmModel>) return score_ocsvm(m, x);
        if constexpr (std::is_same_v<M, PcaModel>) return score_pca(m, x);
      },
      state);
}

FittedState fit_state(const DetectorConfig& config, const FeatureMatrix& train, std::vector<std::string>& warnings) {
  const auto& hp = config.params;
  switch (config.kind) {
    case DetectorKind::cblof: return fit_cblof(train, hp.cblof, config.seed);
    case DetectorKind::hbos: return fit_hbos(train, hp.hbos);
    case DetectorKind::iforest: return fit_iforest(train, hp.iforest, config.seed);
    case DetectorKind::knn: return fit_knn(train, hp.knn);
    case DetectorKind::mcd: {
      auto m = fit_mcd(train, hp.mcd, config.seed);
      if (m.ridged) warnings.push_back("mcd: scatter ridge-regularized");
      return m;
    }
    case DetectorKind::ocsvm: {
      auto m = fit_ocsvm(train, hp.ocsvm, config.seed);
      if (m.subsampled) {
        warnings.push_back("ocsvm: trained on " + std::to_string(m.rows_used) + " of " +
                           std::to_string(train.rows()) + " rows");
      }
      if (!m.converged) {
        warnings.push_back("ocsvm: not converged after " + std::to_string(m.updates) +
                           " updates, violation " + format_double(m.violation));
      }
      return m;
    }
    case DetectorKind::pca: return fit_pca(train, hp.pca);
  }
  throw Error(ErrorCode::invalid_argument, "unknown detector kind");
}

}  // namespace

DetectorModel fit(const DetectorConfig& config, const FeatureMatrix& train) {
  if (!(config.contamination > 0.0 && config.contamination <= 0.5)) {
    throw Error(ErrorCode::invalid_argument, "contamination must lie in (0, 0.5]");
  }
  if (train.empty()) throw Error(ErrorCode::invalid_argument, "fit: empty training matrix");

  const std::string stage = std::string(to_string(config.kind));
  DetectorModel model;
  model.kind_ = config.kind;
  model.contamination_ = config.contamination;
  model.dims_ = train.cols();
  ScoreVector train_scores;
  try {
    model.state_ = fit_state(config, train, model.warnings_);
    train_scores = score_state(model.state_, train);
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind(stage + ": fit:", 0) == 0) throw;
    // Module messages may already start with "<kind>: ".
    const auto tail = what.rfind(stage + ": ", 0) == 0 ? what.substr(stage.size() + 2) : what;
    throw Error(e.code(), stage + ": fit: " + tail);
  }
  for (double s : train_scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::numerical, stage + ": fit: non-finite training score");
  }
  model.threshold_ = quantile(train_scores, 1.0 - config.contamination);
  model.summary_ = {quantile(train_scores, 0.0), quantile(train_scores, 0.25), quantile(train_scores, 0.5),
                    quantile(train_scores, 0.75), quantile(train_scores, 1.0)};
  return model;
}

ScoreVector score(const DetectorModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.dims()) {
    throw Error(ErrorCode::invalid_argument, std::string(to_string(model.kind())) + ": expected " +
                                                 std::to_string(model.dims()) + " columns, got " +
                                                 std::to_string(x.cols()));
  }
  return score_state(model.state(), x);
}

std::vector<std::uint8_t> threshold_scores(std::span<const double> scores, double threshold) {
  std::vector<std::uint8_t> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> predict(const DetectorModel& model, const FeatureMatrix& x) {
  return threshold_scores(score(model, x), model.threshold());
}

}  // namespace flowsentry
