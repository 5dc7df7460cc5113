#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace flowsentry {

// Flow features plus ground truth; label 1 = Attack, 0 = Benign.
struct LabeledDataset {
  FeatureMatrix features;
  std::vector<std::uint8_t> labels;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t attack_count() const noexcept;
  LabeledDataset select_rows(std::span<const std::size_t> rows) const;
  void validate() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

struct CsvOptions {
  std::string label_column = "Label";
  std::string attack_value = "Attack";
  // Written for label 0; on read, anything other than attack_value is benign.
  std::string benign_value = "Benign";
  // Non-feature columns to skip entirely (flow ids, addresses, timestamps).
  std::vector<std::string> ignore_columns;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

LabeledDataset read_csv(std::istream& in, const CsvOptions& options = {}, LoadReport* report = nullptr);
LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {},
                        LoadReport* report = nullptr);

void write_csv(const LabeledDataset& data, std::ostream& out, const CsvOptions& options = {});
void write_csv(const LabeledDataset& data, const std::filesystem::path& path, const CsvOptions& options = {});

struct ResamplePlan {
  std::size_t n_benign = 0;
  std::size_t n_attack = 0;
};

// Class counts for a target benign fraction. The class that must shrink is
// subsampled; the other is kept whole. Throws InfeasibleRatio when the
// minority would round to zero rows.
ResamplePlan plan_resample(std::size_t available_benign, std::size_t available_attack, double benign_ratio);

LabeledDataset resample_to_ratio(const LabeledDataset& data, double benign_ratio, std::uint64_t seed);

// Removes columns with a single distinct value. `dropped` receives their names.
LabeledDataset drop_constant_columns(const LabeledDataset& data, std::vector<std::string>* dropped = nullptr);

struct SplitPair {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::uint64_t seed = 0;
};

SplitPair split_train_test(const LabeledDataset& data, double train_fraction, std::uint64_t seed);

// Per-column z-scoring with statistics taken from the training split only.
class Standardizer {
 public:
  static Standardizer fit(const FeatureMatrix& train);

  FeatureMatrix apply(const FeatureMatrix& x) const;
  FeatureMatrix invert(const FeatureMatrix& z) const;

  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& stddevs() const noexcept { return stddevs_; }
  // Columns with zero spread; they pass through unscaled.
  const std::vector<std::size_t>& constant_columns() const noexcept { return constant_; }

 private:
  void check_shape(const FeatureMatrix& x) const;

  std::vector<double> means_;
  std::vector<double> stddevs_;
  std::vector<std::size_t> constant_;
};

// Benign rows ~ N(0, I); attack rows ~ N(separation * u, attack_scale^2 I)
// for a seeded random unit direction u. Rows are emitted shuffled.
inline constexpr double kSyntheticAttackScale = 2.0;

LabeledDataset generate_synthetic(std::size_t n_benign, std::size_t n_attack, std::size_t p, double separation,
                                  std::uint64_t seed);

}  // namespace flowsentry
