// flowsentry command-line front end. Talks to the library only through the
// C interface in flowsentry/flowsentry.h.
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowsentry/flowsentry.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(flowsentry_status status, const std::string& context) {
  if (status == FLOWSENTRY_OK) return;
  const std::string msg = context + ": " + flowsentry_last_error();
  if (status == FLOWSENTRY_INVALID_ARGUMENT) throw UsageError(msg);
  throw RuntimeError(msg);
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<flowsentry_dataset, Deleter<flowsentry_dataset, flowsentry_dataset_free>>;
using ConfigPtr =
    std::unique_ptr<flowsentry_sweep_config, Deleter<flowsentry_sweep_config, flowsentry_sweep_config_free>>;
using ResultsPtr = std::unique_ptr<flowsentry_results, Deleter<flowsentry_results, flowsentry_results_free>>;

struct DataSource {
  std::string path;
  std::string label_column = "Label";
  std::string attack_value = "Attack";
  std::vector<std::string> ignore_columns;
  std::optional<std::size_t> synth_benign, synth_attack, synth_p;
  std::optional<double> synth_separation;
};

struct Common {
  DataSource source;
  std::string detectors;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  double contamination = 0.1;
  double train_fraction = 0.7;
  bool no_standardize = false;
  bool quiet = false;
};

void add_source_options(CLI::App& cmd, DataSource& src) {
  cmd.add_option("--data", src.path, "Flow CSV with a header row");
  cmd.add_option("--label-column", src.label_column, "Label column name")->capture_default_str();
  cmd.add_option("--attack-value", src.attack_value, "Label token meaning attack")->capture_default_str();
  cmd.add_option("--ignore-columns", src.ignore_columns, "Non-feature columns to skip")->delimiter(',');
  cmd.add_option("--synth-benign", src.synth_benign, "Synthesize instead of --data: benign rows");
  cmd.add_option("--synth-attack", src.synth_attack, "Synthesize: attack rows");
  cmd.add_option("--synth-p", src.synth_p, "Synthesize: feature count");
  cmd.add_option("--synth-separation", src.synth_separation, "Synthesize: attack mean shift");
}

void add_common_options(CLI::App& cmd, Common& c) {
  add_source_options(cmd, c.source);
  cmd.add_option("--detectors", c.detectors, "Comma-separated kinds (default: all seven)");
  cmd.add_option("--set", c.overrides, "Hyperparameter override key=value, e.g. iforest.trees=200");
  cmd.add_option("--seed", c.seed, "Master seed (default: $FLOWSENTRY_SEED, else 200)");
  cmd.add_option("--contamination", c.contamination, "Fraction flagged on train")->capture_default_str();
  cmd.add_option("--train-fraction", c.train_fraction, "Train share of each resample")->capture_default_str();
  cmd.add_flag("--no-standardize", c.no_standardize, "Skip train-fitted z-scoring");
  cmd.add_flag("-q,--quiet", c.quiet, "No progress on stderr");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FLOWSENTRY_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("FLOWSENTRY_SEED is not an unsigned integer: '") + env + "'");
  }
  return 200;
}

DatasetPtr load_source(const DataSource& src, std::uint64_t seed, bool quiet) {
  const bool synth = src.synth_benign || src.synth_attack || src.synth_p || src.synth_separation;
  if (synth && !src.path.empty()) throw UsageError("give either --data or --synth-* options, not both");
  if (!synth && src.path.empty()) throw UsageError("a data source is required: --data PATH or --synth-* options");

  flowsentry_dataset* raw = nullptr;
  if (synth) {
    check(flowsentry_dataset_synthesize(src.synth_benign.value_or(20000), src.synth_attack.value_or(2000),
                                        src.synth_p.value_or(8), src.synth_separation.value_or(6.0), seed, &raw),
          "synthesize");
    return DatasetPtr(raw);
  }
  std::vector<const char*> ignore;
  for (const auto& c : src.ignore_columns) ignore.push_back(c.c_str());
  std::size_t dropped = 0;
  const auto status =
      flowsentry_dataset_load_csv_ex(src.path.c_str(), src.label_column.c_str(), src.attack_value.c_str(),
                                     ignore.data(), ignore.size(), &raw, &dropped);
  if (status != FLOWSENTRY_OK) throw RuntimeError(std::string("load: ") + flowsentry_last_error());
  DatasetPtr data(raw);
  if (!quiet) {
    std::cerr << "loaded " << flowsentry_dataset_rows(raw) << " rows x " << flowsentry_dataset_cols(raw)
              << " features (" << flowsentry_dataset_attack_count(raw) << " attack), dropped " << dropped
              << " non-finite row(s)\n";
  }
  return data;
}

void log_to_stderr(const char* line, void*) { std::cerr << line << '\n'; }

ConfigPtr make_config(const Common& c, std::uint64_t seed) {
  flowsentry_sweep_config* raw = nullptr;
  check(flowsentry_sweep_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (!c.detectors.empty()) check(flowsentry_sweep_config_set_detectors(raw, c.detectors.c_str()), "--detectors");
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    check(flowsentry_sweep_config_set_param(raw, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set");
  }
  check(flowsentry_sweep_config_set_seed(raw, seed), "--seed");
  check(flowsentry_sweep_config_set_contamination(raw, c.contamination), "--contamination");
  check(flowsentry_sweep_config_set_train_fraction(raw, c.train_fraction), "--train-fraction");
  check(flowsentry_sweep_config_set_standardize(raw, c.no_standardize ? 0 : 1), "--no-standardize");
  if (!c.quiet) check(flowsentry_sweep_config_set_log(raw, log_to_stderr, nullptr), "log");
  return cfg;
}

ResultsPtr run(const flowsentry_sweep_config* cfg, const flowsentry_dataset* data) {
  flowsentry_results* raw = nullptr;
  const auto status = flowsentry_sweep_run(cfg, data, &raw);
  if (status != FLOWSENTRY_OK) throw RuntimeError(std::string("sweep: ") + flowsentry_last_error());
  return ResultsPtr(raw);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowsentry: unsupervised outlier detection on network-flow records"};
  app.require_subcommand(1);
  app.set_version_flag("--version", flowsentry_version());

  Common sweep_opts;
  std::string ratios;
  std::size_t repeats = 1;
  std::size_t workers = 1;
  std::string out_dir = "results";
  std::string format = "csv";
  bool timings = false;
  auto* sweep = app.add_subcommand("sweep", "Run the benign-ratio sweep and write result files");
  add_common_options(*sweep, sweep_opts);
  sweep->add_option("--ratios", ratios, "Benign ratios: start:end:step or a,b,c (default 0.5,...,0.99)");
  sweep->add_option("--repeats", repeats, "Resamples per ratio")->capture_default_str();
  sweep->add_option("--workers", workers, "Parallel sweep points (0 = all cores)")->capture_default_str();
  sweep->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sweep->add_option("--format", format, "Results table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sweep->add_flag("--timings", timings, "Fill fit_ms/score_ms (makes output run-dependent)");

  Common fs_opts;
  double ratio = 0.9;
  auto* fit_score = app.add_subcommand("fit-score", "Fit and score one ratio point; TSV on stdout");
  add_common_options(*fit_score, fs_opts);
  fit_score->add_option("--ratio", ratio, "Benign ratio")->capture_default_str();

  std::size_t n_benign = 2000, n_attack = 100, dims = 8;
  double separation = 6.0;
  std::optional<std::uint64_t> synth_seed;
  std::string output = "synthetic.csv";
  auto* synth = app.add_subcommand("synth", "Write a synthetic flow CSV fixture");
  synth->add_option("--n-benign", n_benign, "Benign rows")->capture_default_str();
  synth->add_option("--n-attack", n_attack, "Attack rows")->capture_default_str();
  synth->add_option("--p", dims, "Feature count")->capture_default_str();
  synth->add_option("--separation", separation, "Attack mean shift")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed (default: $FLOWSENTRY_SEED, else 200)");
  synth->add_option("-o,--output", output, "Output CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      flowsentry_dataset* raw = nullptr;
      check(flowsentry_dataset_synthesize(n_benign, n_attack, dims, separation, resolve_seed(synth_seed), &raw),
            "synth");
      DatasetPtr data(raw);
      if (flowsentry_dataset_write_csv(raw, output.c_str()) != FLOWSENTRY_OK) {
        throw RuntimeError(std::string("synth: ") + flowsentry_last_error());
      }
      std::cerr << "wrote " << flowsentry_dataset_rows(raw) << " rows to " << output << '\n';
      return 0;
    }

    const bool is_sweep = sweep->parsed();
    const Common& c = is_sweep ? sweep_opts : fs_opts;
    const std::uint64_t seed = resolve_seed(c.seed);
    // Validate the cheap flags before touching data.
    auto cfg = make_config(c, seed);
    if (is_sweep) {
      if (!ratios.empty()) check(flowsentry_sweep_config_parse_ratios(cfg.get(), ratios.c_str()), "--ratios");
      check(flowsentry_sweep_config_set_repeats(cfg.get(), repeats), "--repeats");
      check(flowsentry_sweep_config_set_workers(cfg.get(), workers), "--workers");
      check(flowsentry_sweep_config_set_timings(cfg.get(), timings ? 1 : 0), "--timings");
    } else {
      check(flowsentry_sweep_config_set_ratios(cfg.get(), &ratio, 1), "--ratio");
    }
    auto data = load_source(c.source, seed, c.quiet);
    auto results = run(cfg.get(), data.get());

    if (is_sweep) {
      if (flowsentry_results_emit(results.get(), out_dir.c_str(), format.c_str()) != FLOWSENTRY_OK) {
        throw RuntimeError(std::string("emit: ") + flowsentry_last_error());
      }
      if (!c.quiet) std::cerr << "wrote results to " << out_dir << '\n';
      return 0;
    }

    std::cout << "detector\tsplit\tbenign_ratio\tauc\taccuracy\tn_rows\tn_attack\twarnings\n";
    for (std::size_t i = 0; i < flowsentry_results_count(results.get()); ++i) {
      flowsentry_result_row row{};
      check(flowsentry_results_get(results.get(), i, &row), "results");
      std::cout << row.detector << '\t' << row.split << '\t' << fmt(row.benign_ratio) << '\t'
                << (row.has_auc ? fmt(row.auc) : "") << '\t' << (row.has_accuracy ? fmt(row.accuracy) : "")
                << '\t' << row.n_rows << '\t' << row.n_attack << '\t' << row.warnings << '\n';
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const RuntimeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
