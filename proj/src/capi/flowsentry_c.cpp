#include "flowsentry/flowsentry.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "detector.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "sweep.hpp"
#include "text.hpp"

struct flowsentry_dataset {
  flowsentry::LabeledDataset data;
};

struct flowsentry_sweep_config {
  flowsentry::SweepConfig config;
  flowsentry::Hyperparameters params;
  double contamination = 0.1;
  std::vector<flowsentry::DetectorKind> kinds{flowsentry::kAllDetectorKinds.begin(),
                                              flowsentry::kAllDetectorKinds.end()};
  flowsentry_log_fn log = nullptr;
  void* log_user = nullptr;
};

struct flowsentry_results {
  std::vector<flowsentry::SweepResult> rows;
  std::vector<std::string> warnings;  // joined per row
};

struct flowsentry_model {
  flowsentry::DetectorModel model;
};

namespace {

thread_local std::string last_error;

flowsentry_status to_status(flowsentry::ErrorCode code) {
  using flowsentry::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return FLOWSENTRY_INVALID_ARGUMENT;
    case ErrorCode::io: return FLOWSENTRY_IO_ERROR;
    case ErrorCode::parse: return FLOWSENTRY_PARSE_ERROR;
    case ErrorCode::infeasible: return FLOWSENTRY_INFEASIBLE;
    case ErrorCode::numerical: return FLOWSENTRY_NUMERICAL_ERROR;
    case ErrorCode::undefined: return FLOWSENTRY_UNDEFINED;
  }
  return FLOWSENTRY_INTERNAL_ERROR;
}

flowsentry_status fail(flowsentry_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
flowsentry_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return FLOWSENTRY_OK;
  } catch (const flowsentry::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FLOWSENTRY_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(FLOWSENTRY_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(FLOWSENTRY_INTERNAL_ERROR, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw flowsentry::Error(flowsentry::ErrorCode::invalid_argument, what);
}

flowsentry::FeatureMatrix matrix_from(const double* values, size_t rows, size_t cols) {
  require(values != nullptr || rows * cols == 0, "values is null");
  require(cols > 0, "cols must be positive");
  return flowsentry::FeatureMatrix(rows, cols, std::vector<double>(values, values + rows * cols));
}

flowsentry::DetectorKind kind_from(const char* name) {
  require(name != nullptr, "detector name is null");
  const auto kind = flowsentry::parse_detector_kind(name);
  if (!kind) {
    throw flowsentry::Error(flowsentry::ErrorCode::invalid_argument,
                            std::string("unknown detector '") + name + "'; valid kinds: " +
                                flowsentry::detector_kind_list());
  }
  return *kind;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

extern "C" {

const char* flowsentry_version(void) { return "0.1.0"; }

const char* flowsentry_status_string(flowsentry_status status) {
  switch (status) {
    case FLOWSENTRY_OK: return "ok";
    case FLOWSENTRY_INVALID_ARGUMENT: return "invalid argument";
    case FLOWSENTRY_IO_ERROR: return "i/o error";
    case FLOWSENTRY_PARSE_ERROR: return "parse error";
    case FLOWSENTRY_INFEASIBLE: return "infeasible";
    case FLOWSENTRY_NUMERICAL_ERROR: return "numerical error";
    case FLOWSENTRY_UNDEFINED: return "undefined";
    case FLOWSENTRY_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* flowsentry_last_error(void) { return last_error.c_str(); }

size_t flowsentry_detector_kind_count(void) { return flowsentry::kAllDetectorKinds.size(); }

const char* flowsentry_detector_kind_name(size_t index) {
  if (index >= flowsentry::kAllDetectorKinds.size()) return nullptr;
  // to_string returns views over string literals.
  return flowsentry::to_string(flowsentry::kAllDetectorKinds[index]).data();
}

const char* flowsentry_detector_kind_list(void) {
  static const std::string list = flowsentry::detector_kind_list();
  return list.c_str();
}

int flowsentry_detector_kind_valid(const char* name) {
  return name != nullptr && flowsentry::parse_detector_kind(name).has_value() ? 1 : 0;
}

// ---- datasets --------------------------------------------------------------

flowsentry_status flowsentry_dataset_load_csv_ex(const char* path, const char* label_column,
                                                 const char* attack_value, const char* const* ignore_columns,
                                                 size_t n_ignore, flowsentry_dataset** out, size_t* dropped_rows) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must be non-null");
    flowsentry::CsvOptions options;
    if (label_column) options.label_column = label_column;
    if (attack_value) options.attack_value = attack_value;
    for (size_t i = 0; i < n_ignore; ++i) {
      require(ignore_columns && ignore_columns[i], "ignore column name is null");
      options.ignore_columns.emplace_back(ignore_columns[i]);
    }
    flowsentry::LoadReport report;
    auto data = flowsentry::load_csv(path, options, &report);
    *out = new flowsentry_dataset{std::move(data)};
    if (dropped_rows) *dropped_rows = report.rows_dropped;
  });
}

flowsentry_status flowsentry_dataset_load_csv(const char* path, const char* label_column, const char* attack_value,
                                              flowsentry_dataset** out, size_t* dropped_rows) {
  return flowsentry_dataset_load_csv_ex(path, label_column, attack_value, nullptr, 0, out, dropped_rows);
}

flowsentry_status flowsentry_dataset_synthesize(size_t n_benign, size_t n_attack, size_t dims, double separation,
                                                uint64_t seed, flowsentry_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new flowsentry_dataset{flowsentry::generate_synthetic(n_benign, n_attack, dims, separation, seed)};
  });
}

flowsentry_status flowsentry_dataset_from_arrays(const double* values, size_t rows, size_t cols,
                                                 const char* const* names, const uint8_t* labels,
                                                 flowsentry_dataset** out) {
  return guarded([&] {
    require(out != nullptr && labels != nullptr, "labels and out must be non-null");
    std::vector<std::string> col_names;
    if (names) {
      for (size_t c = 0; c < cols; ++c) {
        require(names[c] != nullptr, "column name is null");
        col_names.emplace_back(names[c]);
      }
    }
    require(values != nullptr && rows > 0 && cols > 0, "need a non-empty value array");
    flowsentry::LabeledDataset data;
    data.features =
        flowsentry::FeatureMatrix(rows, cols, std::vector<double>(values, values + rows * cols), std::move(col_names));
    require(data.features.all_finite(), "feature values must be finite");
    data.labels.assign(labels, labels + rows);
    data.validate();
    *out = new flowsentry_dataset{std::move(data)};
  });
}

flowsentry_status flowsentry_dataset_write_csv(const flowsentry_dataset* data, const char* path) {
  return guarded([&] {
    require(data != nullptr && path != nullptr, "data and path must be non-null");
    flowsentry::write_csv(data->data, std::filesystem::path(path));
  });
}

size_t flowsentry_dataset_rows(const flowsentry_dataset* data) { return data ? data->data.rows() : 0; }
size_t flowsentry_dataset_cols(const flowsentry_dataset* data) { return data ? data->data.features.cols() : 0; }
size_t flowsentry_dataset_attack_count(const flowsentry_dataset* data) {
  return data ? data->data.attack_count() : 0;
}

flowsentry_status flowsentry_dataset_copy_features(const flowsentry_dataset* data, double* out, size_t capacity) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "data and out must be non-null");
    const auto& v = data->data.features.values();
    require(capacity >= v.size(), "output buffer too small");
    std::memcpy(out, v.data(), v.size() * sizeof(double));
  });
}

flowsentry_status flowsentry_dataset_copy_labels(const flowsentry_dataset* data, uint8_t* out, size_t capacity) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "data and out must be non-null");
    const auto& l = data->data.labels;
    require(capacity >= l.size(), "output buffer too small");
    std::memcpy(out, l.data(), l.size());
  });
}

void flowsentry_dataset_free(flowsentry_dataset* data) { delete data; }

// ---- single detector -------------------------------------------------------

flowsentry_status flowsentry_model_fit(const char* kind, const char* const* params, size_t n_params,
                                       double contamination, uint64_t seed, const double* values, size_t rows,
                                       size_t cols, flowsentry_model** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    flowsentry::DetectorConfig config;
    config.kind = kind_from(kind);
    config.contamination = contamination;
    config.seed = seed;
    for (size_t i = 0; i < n_params; ++i) {
      require(params && params[i], "parameter string is null");
      const std::string_view kv = params[i];
      const auto eq = kv.find('=');
      require(eq != std::string_view::npos, "parameter must be key=value");
      config.params.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    *out = new flowsentry_model{flowsentry::fit(config, matrix_from(values, rows, cols))};
  });
}

flowsentry_status flowsentry_model_score(const flowsentry_model* model, const double* values, size_t rows,
                                         size_t cols, double* scores) {
  return guarded([&] {
    require(model != nullptr && scores != nullptr, "model and scores must be non-null");
    const auto s = flowsentry::score(model->model, matrix_from(values, rows, cols));
    std::copy(s.begin(), s.end(), scores);
  });
}

flowsentry_status flowsentry_model_predict(const flowsentry_model* model, const double* values, size_t rows,
                                           size_t cols, uint8_t* predictions) {
  return guarded([&] {
    require(model != nullptr && predictions != nullptr, "model and predictions must be non-null");
    const auto p = flowsentry::predict(model->model, matrix_from(values, rows, cols));
    std::copy(p.begin(), p.end(), predictions);
  });
}

double flowsentry_model_threshold(const flowsentry_model* model) { return model ? model->model.threshold() : 0.0; }

void flowsentry_model_free(flowsentry_model* model) { delete model; }

flowsentry_status flowsentry_roc_auc(const uint8_t* labels, const double* scores, size_t n, double* auc) {
  return guarded([&] {
    require(labels != nullptr && scores != nullptr && auc != nullptr, "null argument");
    *auc = flowsentry::roc_auc({labels, n}, {scores, n});
  });
}

// ---- sweeps ----------------------------------------------------------------

flowsentry_status flowsentry_sweep_config_create(flowsentry_sweep_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    auto* cfg = new flowsentry_sweep_config;
    cfg->config.ratios = flowsentry::default_ratio_grid();
    *out = cfg;
  });
}

flowsentry_status flowsentry_sweep_config_set_ratios(flowsentry_sweep_config* cfg, const double* ratios, size_t n) {
  return guarded([&] {
    require(cfg != nullptr && ratios != nullptr && n > 0, "need a non-empty ratio array");
    for (size_t i = 0; i < n; ++i) require(ratios[i] > 0.0 && ratios[i] < 1.0, "ratios must lie in (0, 1)");
    cfg->config.ratios.assign(ratios, ratios + n);
  });
}

flowsentry_status flowsentry_sweep_config_parse_ratios(flowsentry_sweep_config* cfg, const char* grid) {
  return guarded([&] {
    require(cfg != nullptr && grid != nullptr, "null argument");
    cfg->config.ratios = flowsentry::parse_ratio_grid(grid);
  });
}

flowsentry_status flowsentry_sweep_config_set_detectors(flowsentry_sweep_config* cfg, const char* names) {
  return guarded([&] {
    require(cfg != nullptr && names != nullptr, "null argument");
    std::vector<flowsentry::DetectorKind> kinds;
    std::string_view rest = names;
    for (;;) {
      const auto comma = rest.find(',');
      const std::string piece(flowsentry::trim(rest.substr(0, comma)));
      if (!piece.empty()) {
        const auto kind = kind_from(piece.c_str());
        if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    require(!kinds.empty(), "no detectors named");
    cfg->kinds = std::move(kinds);
  });
}

flowsentry_status flowsentry_sweep_config_set_param(flowsentry_sweep_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr, "null argument");
    cfg->params.set(key, value);
  });
}

flowsentry_status flowsentry_sweep_config_set_contamination(flowsentry_sweep_config* cfg, double contamination) {
  return guarded([&] {
    require(cfg != nullptr, "cfg is null");
    require(contamination > 0.0 && contamination <= 0.5, "contamination must lie in (0, 0.5]");
    cfg->contamination = contamination;
  });
}

flowsentry_status flowsentry_sweep_config_set_seed(flowsentry_sweep_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg != nullptr, "cfg is null");
    cfg->config.master_seed = seed;
  });
}

flowsentry_status flowsentry_sweep_config_set_repeats(flowsentry_sweep_config* cfg, size_t repeats) {
  return guarded([&] {
    require(cfg != nullptr && repeats > 0, "repeats must be >= 1");
    cfg->config.repeats = repeats;
  });
}

flowsentry_status flowsentry_sweep_config_set_train_fraction(flowsentry_sweep_config* cfg, double fraction) {
  return guarded([&] {
    require(cfg != nullptr && fraction > 0.0 && fraction < 1.0, "train fraction must lie in (0, 1)");
    cfg->config.train_fraction = fraction;
  });
}

flowsentry_status flowsentry_sweep_config_set_workers(flowsentry_sweep_config* cfg, size_t workers) {
  return guarded([&] {
    require(cfg != nullptr, "cfg is null");
    cfg->config.workers = workers;
  });
}

flowsentry_status flowsentry_sweep_config_set_standardize(flowsentry_sweep_config* cfg, int on) {
  return guarded([&] {
    require(cfg != nullptr, "cfg is null");
    cfg->config.standardize = on != 0;
  });
}

flowsentry_status flowsentry_sweep_config_set_timings(flowsentry_sweep_config* cfg, int on) {
  return guarded([&] {
    require(cfg != nullptr, "cfg is null");
    cfg->config.record_timings = on != 0;
  });
}

flowsentry_status flowsentry_sweep_config_set_log(flowsentry_sweep_config* cfg, flowsentry_log_fn fn, void* user) {
  return guarded([&] {
    require(cfg != nullptr, "cfg is null");
    cfg->log = fn;
    cfg->log_user = user;
  });
}

void flowsentry_sweep_config_free(flowsentry_sweep_config* cfg) { delete cfg; }

flowsentry_status flowsentry_sweep_run(const flowsentry_sweep_config* cfg, const flowsentry_dataset* data,
                                       flowsentry_results** out) {
  return guarded([&] {
    require(cfg != nullptr && data != nullptr && out != nullptr, "null argument");
    flowsentry::SweepConfig config = cfg->config;
    config.detectors.clear();
    for (auto kind : cfg->kinds) {
      flowsentry::DetectorConfig det;
      det.kind = kind;
      det.params = cfg->params;
      det.contamination = cfg->contamination;
      config.detectors.push_back(det);
    }
    if (cfg->log) {
      auto fn = cfg->log;
      void* user = cfg->log_user;
      config.log = [fn, user](std::string_view line) { fn(std::string(line).c_str(), user); };
    }
    auto results = std::make_unique<flowsentry_results>();
    results->rows = flowsentry::run_sweep(config, data->data);
    for (const auto& r : results->rows) results->warnings.push_back(join(r.warnings));
    *out = results.release();
  });
}

size_t flowsentry_results_count(const flowsentry_results* results) { return results ? results->rows.size() : 0; }

flowsentry_status flowsentry_results_get(const flowsentry_results* results, size_t index,
                                         flowsentry_result_row* row) {
  return guarded([&] {
    require(results != nullptr && row != nullptr, "null argument");
    require(index < results->rows.size(), "result index out of range");
    const auto& r = results->rows[index];
    row->detector = flowsentry::to_string(r.detector).data();
    row->benign_ratio = r.benign_ratio;
    row->repeat = r.repeat;
    row->split = flowsentry::to_string(r.split).data();
    row->has_auc = r.auc.has_value();
    row->auc = r.auc.value_or(0.0);
    row->has_accuracy = r.accuracy.has_value();
    row->accuracy = r.accuracy.value_or(0.0);
    row->n_rows = r.n_rows;
    row->n_attack = r.n_attack;
    row->has_timings = r.fit_ms.has_value();
    row->fit_ms = r.fit_ms.value_or(0.0);
    row->score_ms = r.score_ms.value_or(0.0);
    row->seed = r.seed;
    row->warnings = results->warnings[index].c_str();
  });
}

flowsentry_status flowsentry_results_emit(const flowsentry_results* results, const char* out_dir,
                                          const char* format) {
  return guarded([&] {
    require(results != nullptr && out_dir != nullptr, "null argument");
    const std::string fmt = format ? format : "csv";
    require(fmt == "csv" || fmt == "json", "format must be 'csv' or 'json'");
    flowsentry::emit_results(results->rows, out_dir,
                             fmt == "csv" ? flowsentry::ResultFormat::csv : flowsentry::ResultFormat::json);
  });
}

void flowsentry_results_free(flowsentry_results* results) { delete results; }

}  // extern "C"
