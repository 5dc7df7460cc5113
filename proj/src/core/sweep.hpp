#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "detector.hpp"

namespace flowsentry {

struct SweepConfig {
  std::vector<double> ratios;  // benign fractions, each in (0, 1)
  std::vector<DetectorConfig> detectors;
  double train_fraction = 0.7;
  std::uint64_t master_seed = 200;
  std::size_t repeats = 1;
  bool standardize = true;
  // Wall-clock columns are the only non-reproducible output; off by default.
  bool record_timings = false;
  std::size_t workers = 1;
  std::function<void(std::string_view)> log;
};

enum class Split { train, test };
std::string_view to_string(Split split);

// One row per (detector, ratio, repeat, split). A failed point keeps its row
// with auc and accuracy empty and the reason in `warnings`.
struct SweepResult {
  DetectorKind detector = DetectorKind::iforest;
  double benign_ratio = 0.0;
  std::size_t repeat = 0;
  Split split = Split::train;
  std::optional<double> auc;
  std::optional<double> accuracy;
  std::size_t n_rows = 0;
  std::size_t n_attack = 0;
  std::optional<double> fit_ms;
  std::optional<double> score_ms;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  double attack_ratio() const { return n_rows ? static_cast<double>(n_attack) / static_cast<double>(n_rows) : 0.0; }
};

std::vector<double> default_ratio_grid();
// "start:end:step" (inclusive of end within half a step) or "a,b,c".
std::vector<double> parse_ratio_grid(std::string_view grid);

std::uint64_t sweep_point_seed(std::uint64_t master_seed, std::size_t ratio_index, std::size_t repeat);

std::vector<SweepResult> run_sweep(const SweepConfig& config, const LabeledDataset& data);

enum class ResultFormat { csv, json };

inline constexpr std::string_view kResultsCsvHeader =
    "detector,benign_ratio,repeat,split,auc,accuracy,n_rows,n_attack,fit_ms,score_ms,seed,warnings";

std::string results_to_csv(std::span<const SweepResult> results);
std::string results_to_json(std::span<const SweepResult> results);

// Writes results.{csv,json} plus <kind>_auc.dat / <kind>_acc.dat plot series.
// Returns the paths written.
std::vector<std::filesystem::path> emit_results(std::span<const SweepResult> results,
                                                const std::filesystem::path& out_dir, ResultFormat format);

}  // namespace flowsentry
