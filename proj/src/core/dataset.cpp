#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "error.hpp"
#include "random.hpp"
#include "text.hpp"

namespace flowsentry {

std::size_t LabeledDataset::attack_count() const noexcept {
  std::size_t n = 0;
  for (auto l : labels) n += l;
  return n;
}

LabeledDataset LabeledDataset::select_rows(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features = features.select_rows(rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  return out;
}

void LabeledDataset::validate() const {
  if (labels.size() != features.rows()) {
    throw Error(ErrorCode::invalid_argument, "label count does not match feature rows");
  }
  for (auto l : labels) {
    if (l > 1) throw Error(ErrorCode::invalid_argument, "labels must be 0 or 1");
  }
}

// ---------------------------------------------------------------------------
// CSV

LabeledDataset read_csv(std::istream& in, const CsvOptions& options, LoadReport* report) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "csv: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  std::unordered_set<std::string> ignored(options.ignore_columns.begin(), options.ignore_columns.end());
  std::ptrdiff_t label_col = -1;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string name(trim(header[c]));
    if (name == options.label_column) {
      label_col = static_cast<std::ptrdiff_t>(c);
    } else if (!ignored.count(name)) {
      feature_cols.push_back(c);
      names.push_back(std::move(name));
    }
  }
  if (label_col < 0) {
    throw Error(ErrorCode::invalid_argument, "csv: label column '" + options.label_column + "' not found");
  }
  if (feature_cols.empty()) throw Error(ErrorCode::invalid_argument, "csv: no feature columns");

  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::size_t read = 0, dropped = 0, line_no = 1;
  std::vector<double> row(feature_cols.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++read;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::parse, "csv: line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
    }
    bool keep = true;
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto& field = fields[feature_cols[j]];
      if (trim(field).empty()) {
        keep = false;
        continue;
      }
      const auto v = parse_double(field);
      if (!v) {
        throw Error(ErrorCode::parse, "csv: line " + std::to_string(line_no) + ", column '" + names[j] +
                                          "': not a number: '" + field + "'");
      }
      if (!std::isfinite(*v)) keep = false;
      row[j] = *v;
    }
    if (!keep) {
      ++dropped;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(trim(fields[static_cast<std::size_t>(label_col)]) == options.attack_value ? 1 : 0);
  }
  if (report) *report = {read, dropped};
  if (labels.empty()) throw Error(ErrorCode::invalid_argument, "csv: no rows survive sanitization");

  LabeledDataset out;
  out.features = FeatureMatrix(labels.size(), feature_cols.size(), std::move(values), std::move(names));
  out.labels = std::move(labels);
  return out;
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  return read_csv(in, options, report);
}

void write_csv(const LabeledDataset& data, std::ostream& out, const CsvOptions& options) {
  data.validate();
  const auto& names = data.features.column_names();
  for (const auto& n : names) out << csv_escape(n) << ',';
  out << csv_escape(options.label_column) << '\n';
  const std::string attack = csv_escape(options.attack_value);
  const std::string benign = csv_escape(options.benign_value);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (double v : data.features.row(r)) out << format_double(v) << ',';
    out << (data.labels[r] ? attack : benign) << '\n';
  }
}

void write_csv(const LabeledDataset& data, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  write_csv(data, out, options);
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Resampling

ResamplePlan plan_resample(std::size_t available_benign, std::size_t available_attack, double benign_ratio) {
  if (!(benign_ratio > 0.0 && benign_ratio < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "benign_ratio must lie in (0, 1)");
  }
  if (available_benign == 0 || available_attack == 0) {
    throw Error(ErrorCode::invalid_argument, "resampling needs both classes present");
  }
  const double odds = benign_ratio / (1.0 - benign_ratio);
  const double nb = static_cast<double>(available_benign);
  const double na = static_cast<double>(available_attack);

  ResamplePlan plan;
  const double wanted_attack = nb / odds;
  if (wanted_attack <= na) {
    plan.n_benign = available_benign;
    plan.n_attack = static_cast<std::size_t>(std::llround(wanted_attack));
  } else {
    plan.n_attack = available_attack;
    plan.n_benign = static_cast<std::size_t>(std::llround(na * odds));
  }
  plan.n_attack = std::min(plan.n_attack, available_attack);
  plan.n_benign = std::min(plan.n_benign, available_benign);

  if (plan.n_attack == 0) {
    throw InfeasibleRatio("benign_ratio " + format_double(benign_ratio) + " needs fewer than one attack row",
                          nb / (nb + 1.0));
  }
  if (plan.n_benign == 0) {
    throw InfeasibleRatio("benign_ratio " + format_double(benign_ratio) + " needs fewer than one benign row",
                          1.0 / (1.0 + na));
  }
  return plan;
}

LabeledDataset resample_to_ratio(const LabeledDataset& data, double benign_ratio, std::uint64_t seed) {
  data.validate();
  std::vector<std::size_t> benign, attack;
  for (std::size_t i = 0; i < data.rows(); ++i) (data.labels[i] ? attack : benign).push_back(i);
  const auto plan = plan_resample(benign.size(), attack.size(), benign_ratio);

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(plan.n_benign + plan.n_attack);
  for (std::size_t k : sample_without_replacement(benign.size(), plan.n_benign, rng)) chosen.push_back(benign[k]);
  for (std::size_t k : sample_without_replacement(attack.size(), plan.n_attack, rng)) chosen.push_back(attack[k]);
  // Keep source order inside the selection, then shuffle once.
  std::sort(chosen.begin(), chosen.end());
  const auto order = permutation(chosen.size(), rng);
  std::vector<std::size_t> rows(chosen.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = chosen[order[i]];
  return data.select_rows(rows);
}

LabeledDataset drop_constant_columns(const LabeledDataset& data, std::vector<std::string>* dropped) {
  data.validate();
  const auto& x = data.features;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    bool varies = false;
    for (std::size_t r = 1; r < x.rows() && !varies; ++r) varies = x(r, c) != x(0, c);
    if (varies) {
      keep.push_back(c);
    } else if (dropped) {
      dropped->push_back(x.column_names()[c]);
    }
  }
  if (keep.empty()) throw Error(ErrorCode::invalid_argument, "every feature column is constant");
  if (keep.size() == x.cols()) return data;
  LabeledDataset out;
  out.features = x.select_columns(keep);
  out.labels = data.labels;
  return out;
}

SplitPair split_train_test(const LabeledDataset& data, double train_fraction, std::uint64_t seed) {
  data.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "train_fraction must lie in (0, 1)");
  }
  const std::size_t n = data.rows();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n < 2 || n_train == 0 || n_train >= n) {
    throw Error(ErrorCode::invalid_argument,
                "split of " + std::to_string(n) + " rows leaves an empty train or test set");
  }
  Rng rng(seed);
  SplitPair out;
  out.seed = seed;
  out.train_rows = sample_without_replacement(n, n_train, rng);
  std::vector<char> in_train(n, 0);
  for (auto r : out.train_rows) in_train[r] = 1;
  for (std::size_t r = 0; r < n; ++r) {
    if (!in_train[r]) out.test_rows.push_back(r);
  }
  out.train = data.select_rows(out.train_rows);
  out.test = data.select_rows(out.test_rows);
  return out;
}

// ---------------------------------------------------------------------------
// Standardizer

Standardizer Standardizer::fit(const FeatureMatrix& train) {
  if (train.empty()) throw Error(ErrorCode::invalid_argument, "standardizer: empty training matrix");
  const std::size_t n = train.rows(), p = train.cols();
  Standardizer s;
  s.means_.assign(p, 0.0);
  s.stddevs_.assign(p, 1.0);
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += train(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = train(r, c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.means_[c] = mean;
    if (sd > 0.0 && std::isfinite(sd)) {
      s.stddevs_[c] = sd;
    } else {
      s.constant_.push_back(c);
    }
  }
  return s;
}

void Standardizer::check_shape(const FeatureMatrix& x) const {
  if (x.cols() != means_.size()) {
    throw Error(ErrorCode::invalid_argument, "standardizer: expected " + std::to_string(means_.size()) +
                                                 " columns, got " + std::to_string(x.cols()));
  }
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  check_shape(x);
  FeatureMatrix out = x;
  std::vector<char> pass(means_.size(), 0);
  for (auto c : constant_) pass[c] = 1;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!pass[c]) out(r, c) = (x(r, c) - means_[c]) / stddevs_[c];
    }
  }
  return out;
}

FeatureMatrix Standardizer::invert(const FeatureMatrix& z) const {
  check_shape(z);
  FeatureMatrix out = z;
  std::vector<char> pass(means_.size(), 0);
  for (auto c : constant_) pass[c] = 1;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
      if (!pass[c]) out(r, c) = z(r, c) * stddevs_[c] + means_[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic fixture

LabeledDataset generate_synthetic(std::size_t n_benign, std::size_t n_attack, std::size_t p, double separation,
                                  std::uint64_t seed) {
  if (n_benign == 0 || p == 0) {
    throw Error(ErrorCode::invalid_argument, "synthetic: benign count and dimension must be positive");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> direction(p);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& d : direction) {
      d = normal(rng);
      norm += d * d;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& d : direction) d /= norm;

  const std::size_t n = n_benign + n_attack;
  const auto order = permutation(n, rng);
  std::vector<double> values(n * p);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = order[i];
    const bool attack = i >= n_benign;
    labels[r] = attack ? 1 : 0;
    for (std::size_t c = 0; c < p; ++c) {
      const double z = normal(rng);
      values[r * p + c] = attack ? separation * direction[c] + kSyntheticAttackScale * z : z;
    }
  }
  LabeledDataset out;
  out.features = FeatureMatrix(n, p, std::move(values));
  out.labels = std::move(labels);
  return out;
}

}  // namespace flowsentry
