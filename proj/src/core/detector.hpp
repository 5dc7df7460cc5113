#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iforest.hpp"
#include "matrix.hpp"
#include "ocsvm.hpp"
#include "proximity.hpp"
#include "stat.hpp"

namespace flowsentry {

enum class DetectorKind { cblof, hbos, iforest, knn, mcd, ocsvm, pca };

inline constexpr std::array<DetectorKind, 7> kAllDetectorKinds = {
    DetectorKind::cblof, DetectorKind::hbos, DetectorKind::iforest, DetectorKind::knn,
    DetectorKind::mcd,   DetectorKind::ocsvm, DetectorKind::pca,
};

std::string_view to_string(DetectorKind kind);
std::optional<DetectorKind> parse_detector_kind(std::string_view name);
// "cblof, hbos, ..." for error messages.
std::string detector_kind_list();

// Every detector's knobs, addressable as "<kind>.<name>" strings.
struct Hyperparameters {
  KnnParams knn;
  CblofParams cblof;
  HbosParams hbos;
  IforestParams iforest;
  McdParams mcd;
  OcsvmParams ocsvm;
  PcaParams pca;

  // Throws Error(invalid_argument) on an unknown key or malformed value.
  void set(std::string_view key, std::string_view value);
  static const std::vector<std::string>& keys();
};

struct DetectorConfig {
  DetectorKind kind = DetectorKind::iforest;
  Hyperparameters params;
  double contamination = 0.1;
  std::uint64_t seed = 0;
};

struct ScoreSummary {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

using FittedState = std::variant<CblofModel, HbosModel, IforestModel, KnnModel, McdModel, OcsvmModel, PcaModel>;

// Immutable once returned by fit().
class DetectorModel {
 public:
  DetectorKind kind() const noexcept { return kind_; }
  double threshold() const noexcept { return threshold_; }
  double contamination() const noexcept { return contamination_; }
  std::size_t dims() const noexcept { return dims_; }
  const ScoreSummary& train_summary() const noexcept { return summary_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const FittedState& state() const noexcept { return state_; }

 private:
  friend DetectorModel fit(const DetectorConfig&, const FeatureMatrix&);

  DetectorKind kind_ = DetectorKind::iforest;
  double threshold_ = 0.0;
  double contamination_ = 0.1;
  std::size_t dims_ = 0;
  ScoreSummary summary_;
  std::vector<std::string> warnings_;
  FittedState state_;
};

// Fits on features only; labels never reach a detector.
DetectorModel fit(const DetectorConfig& config, const FeatureMatrix& train);
ScoreVector score(const DetectorModel& model, const FeatureMatrix& x);
// 1 iff score > threshold.
std::vector<std::uint8_t> predict(const DetectorModel& model, const FeatureMatrix& x);
std::vector<std::uint8_t> threshold_scores(std::span<const double> scores, double threshold);

// Linear-interpolated empirical quantile (the numpy "linear" convention).
double quantile(std::vector<double> values, double q);

}  // namespace flowsentry
