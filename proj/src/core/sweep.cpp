#include "sweep.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "error.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "text.hpp"

namespace flowsentry {

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::vector<double> default_ratio_grid() { return {0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.99}; }

std::vector<double> parse_ratio_grid(std::string_view grid) {
  auto number = [&](std::string_view s) {
    const auto v = parse_double(s);
    if (!v) throw Error(ErrorCode::invalid_argument, "ratio grid: bad number '" + std::string(s) + "'");
    return *v;
  };
  std::vector<double> out;
  if (grid.find(':') != std::string_view::npos) {
    const auto a = grid.find(':');
    const auto b = grid.find(':', a + 1);
    if (b == std::string_view::npos) {
      throw Error(ErrorCode::invalid_argument, "ratio grid: expected start:end:step");
    }
    const double start = number(grid.substr(0, a));
    const double end = number(grid.substr(a + 1, b - a - 1));
    const double step = number(grid.substr(b + 1));
    if (!(step > 0.0) || end < start) throw Error(ErrorCode::invalid_argument, "ratio grid: empty range");
    const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 0.5));
    for (std::size_t i = 0; i <= count; ++i) {
      // Round away accumulated binary error so 0.1 * 3 prints as 0.3.
      const double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
      if (v <= end + 1e-12) out.push_back(v);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= grid.size()) {
      const auto comma = grid.find(',', pos);
      const auto piece = grid.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      if (!trim(piece).empty()) out.push_back(number(piece));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "ratio grid is empty");
  for (double r : out) {
    if (!(r > 0.0 && r < 1.0)) {
      throw Error(ErrorCode::invalid_argument, "ratio " + format_double(r) + " outside (0, 1)");
    }
  }
  return out;
}

std::uint64_t sweep_point_seed(std::uint64_t master_seed, std::size_t ratio_index, std::size_t repeat) {
  return derive_seed(derive_seed(master_seed, ratio_index), repeat);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void fail_point(std::vector<SweepResult>& rows, const std::string& why) {
  for (auto& r : rows) {
    r.warnings.push_back(why);
    r.auc.reset();
    r.accuracy.reset();
  }
}

std::vector<SweepResult> run_point(const SweepConfig& config, const LabeledDataset& data, std::size_t ratio_index,
                                   std::size_t repeat) {
  const double ratio = config.ratios[ratio_index];
  const std::uint64_t seed = sweep_point_seed(config.master_seed, ratio_index, repeat);

  std::vector<SweepResult> rows;
  for (const auto& det : config.detectors) {
    for (Split split : {Split::train, Split::test}) {
      SweepResult r;
      r.detector = det.kind;
      r.benign_ratio = ratio;
      r.repeat = repeat;
      r.split = split;
      r.seed = seed;
      rows.push_back(std::move(r));
    }
  }

  SplitPair split;
  FeatureMatrix train_x, test_x;
  std::vector<std::string> shared_warnings;
  try {
    const auto resampled = resample_to_ratio(data, ratio, derive_seed(seed, 0));
    std::vector<std::string> dropped;
    const auto pruned = drop_constant_columns(resampled, &dropped);
    if (!dropped.empty()) {
      shared_warnings.push_back("dropped " + std::to_string(dropped.size()) + " constant column(s)");
    }
    split = split_train_test(pruned, config.train_fraction, derive_seed(seed, 1));
    if (config.standardize) {
      const auto scaler = Standardizer::fit(split.train.features);
      if (!scaler.constant_columns().empty()) {
        shared_warnings.push_back(std::to_string(scaler.constant_columns().size()) +
                                  " column(s) constant on train, left unscaled");
      }
      train_x = scaler.apply(split.train.features);
      test_x = scaler.apply(split.test.features);
    } else {
      train_x = split.train.features;
      test_x = split.test.features;
    }
  } catch (const InfeasibleRatio& e) {
    fail_point(rows, std::string("skipped: ") + e.what() + " (nearest feasible benign_ratio " +
                         format_double(e.nearest_benign_ratio()) + ")");
    return rows;
  } catch (const Error& e) {
    fail_point(rows, std::string("skipped: ") + e.what());
    return rows;
  }

  for (std::size_t d = 0; d < config.detectors.size(); ++d) {
    auto& train_row = rows[2 * d];
    auto& test_row = rows[2 * d + 1];
    train_row.n_rows = split.train.rows();
    train_row.n_attack = split.train.attack_count();
    test_row.n_rows = split.test.rows();
    test_row.n_attack = split.test.attack_count();
    for (auto* r : {&train_row, &test_row}) r->warnings = shared_warnings;

    DetectorConfig det = config.detectors[d];
    det.seed = derive_seed(seed ^ det.seed, 2 + static_cast<std::uint64_t>(det.kind));
    try {
      const auto fit_start = Clock::now();
      const auto model = fit(det, train_x);
      const double fit_ms = elapsed_ms(fit_start);

      for (auto* r : {&train_row, &test_row}) {
        const bool is_train = r->split == Split::train;
        const auto& x = is_train ? train_x : test_x;
        const auto& labels = is_train ? split.train.labels : split.test.labels;
        const auto score_start = Clock::now();
        const auto s = score(model, x);
        const double score_ms = elapsed_ms(score_start);
        const auto eval = evaluate(labels, s, threshold_scores(s, model.threshold()));
        r->auc = eval.auc;
        r->accuracy = eval.accuracy;
        if (!eval.auc) r->warnings.push_back("auc undefined: single-class split");
        r->warnings.insert(r->warnings.end(), model.warnings().begin(), model.warnings().end());
        if (config.record_timings) {
          r->fit_ms = fit_ms;
          r->score_ms = score_ms;
        }
      }
    } catch (const Error& e) {
      for (auto* r : {&train_row, &test_row}) {
        r->warnings.push_back(std::string("failed: ") + e.what());
        r->auc.reset();
        r->accuracy.reset();
      }
    }
  }
  if (config.log) {
    config.log("benign_ratio " + format_double(ratio) + " repeat " + std::to_string(repeat) + ": " +
               std::to_string(split.train.rows()) + " train / " + std::to_string(split.test.rows()) + " test rows");
  }
  return rows;
}

}  // namespace

std::vector<SweepResult> run_sweep(const SweepConfig& config, const LabeledDataset& data) {
  if (config.ratios.empty()) throw Error(ErrorCode::invalid_argument, "sweep: no ratios");
  for (double r : config.ratios) {
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::invalid_argument, "sweep: ratio outside (0, 1)");
  }
  if (config.detectors.empty()) throw Error(ErrorCode::invalid_argument, "sweep: no detectors");
  if (config.repeats == 0) throw Error(ErrorCode::invalid_argument, "sweep: repeats must be >= 1");
  data.validate();
  const std::size_t attacks = data.attack_count();
  if (attacks == 0 || attacks == data.rows()) {
    throw Error(ErrorCode::invalid_argument, "sweep: dataset must contain both classes");
  }

  const std::size_t jobs = config.ratios.size() * config.repeats;
  std::vector<std::vector<SweepResult>> slots(jobs);
  parallel_for(jobs, config.workers == 0 ? default_workers() : config.workers, [&](std::size_t j) {
    slots[j] = run_point(config, data, j / config.repeats, j % config.repeats);
  });

  std::vector<SweepResult> out;
  bool any_ok = false;
  for (auto& slot : slots) {
    for (auto& r : slot) {
      any_ok = any_ok || r.accuracy.has_value();
      out.push_back(std::move(r));
    }
  }
  if (!any_ok) {
    std::string why = out.empty() || out.front().warnings.empty() ? "unknown" : out.front().warnings.back();
    throw Error(ErrorCode::infeasible, "sweep: every point failed (first: " + why + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

std::string join_warnings(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& s : w) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

}  // namespace

std::string results_to_csv(std::span<const SweepResult> results) {
  std::ostringstream os;
  os << kResultsCsvHeader << '\n';
  for (const auto& r : results) {
    os << to_string(r.detector) << ',' << format_double(r.benign_ratio) << ',' << r.repeat << ','
       << to_string(r.split) << ',' << opt(r.auc) << ',' << opt(r.accuracy) << ',' << r.n_rows << ','
       << r.n_attack << ',' << opt(r.fit_ms) << ',' << opt(r.score_ms) << ',' << r.seed << ','
       << csv_escape(join_warnings(r.warnings)) << '\n';
  }
  return os.str();
}

std::string results_to_json(std::span<const SweepResult> results) {
  auto value = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["detector"] = to_string(r.detector);
    row["benign_ratio"] = r.benign_ratio;
    row["repeat"] = r.repeat;
    row["split"] = to_string(r.split);
    row["auc"] = value(r.auc);
    row["accuracy"] = value(r.accuracy);
    row["n_rows"] = r.n_rows;
    row["n_attack"] = r.n_attack;
    row["fit_ms"] = value(r.fit_ms);
    row["score_ms"] = value(r.score_ms);
    row["seed"] = r.seed;
    row["warnings"] = r.warnings;
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit_results(std::span<const SweepResult> results,
                                                const std::filesystem::path& out_dir, ResultFormat format) {
  if (results.empty()) throw Error(ErrorCode::invalid_argument, "emit: no results");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  const auto table = out_dir / (format == ResultFormat::csv ? "results.csv" : "results.json");
  write_file(table, format == ResultFormat::csv ? results_to_csv(results) : results_to_json(results));
  written.push_back(table);

  // Per detector and ratio: mean over repeats of each split's metric.
  struct Cell {
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
  };
  struct Series {
    std::vector<double> ratios;
    std::map<double, Cell> auc, acc;
  };
  std::vector<DetectorKind> kinds;
  std::map<DetectorKind, Series> series;
  for (const auto& r : results) {
    if (!series.count(r.detector)) kinds.push_back(r.detector);
    auto& s = series[r.detector];
    if (!r.accuracy) continue;
    if (!s.acc.count(r.benign_ratio)) s.ratios.push_back(r.benign_ratio);
    const int side = r.split == Split::train ? 0 : 1;
    auto& acc = s.acc[r.benign_ratio];
    acc.sum[side] += *r.accuracy;
    ++acc.count[side];
    auto& auc = s.auc[r.benign_ratio];
    if (r.auc) {
      auc.sum[side] += *r.auc;
      ++auc.count[side];
    }
  }
  auto mean = [](const Cell& c, int side) {
    return c.count[side] ? format_double(c.sum[side] / static_cast<double>(c.count[side])) : std::string("nan");
  };
  for (auto kind : kinds) {
    const auto& s = series[kind];
    for (const auto& [suffix, metric, cells] :
         {std::tuple{"_auc.dat", "auc", &s.auc}, std::tuple{"_acc.dat", "accuracy", &s.acc}}) {
      std::ostringstream os;
      os << "# " << to_string(kind) << ' ' << metric << " vs benign_ratio\n# benign_ratio train test\n";
      for (double ratio : s.ratios) {
        const auto& c = cells->at(ratio);
        os << format_double(ratio) << ' ' << mean(c, 0) << ' ' << mean(c, 1) << '\n';
      }
      const auto path = out_dir / (std::string(to_string(kind)) + suffix);
      write_file(path, os.str());
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace flowsentry
