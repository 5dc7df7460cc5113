/*
 * flowsentry - unsupervised outlier detection for network-flow records.
 *
 * C interface over the C++ core. Every object is an opaque handle owned by
 * the caller and released with its matching *_free function. Functions that
 * can fail return a flowsentry_status; on failure, flowsentry_last_error()
 * describes the problem for the calling thread.
 */
#ifndef FLOWSENTRY_FLOWSENTRY_H
#define FLOWSENTRY_FLOWSENTRY_H

#include <stddef.h>
#include <stdint.h>

#if defined(FLOWSENTRY_BUILDING)
#define FLOWSENTRY_API __attribute__((visibility("default")))
#else
#define FLOWSENTRY_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum flowsentry_status {
  FLOWSENTRY_OK = 0,
  FLOWSENTRY_INVALID_ARGUMENT = 1,
  FLOWSENTRY_IO_ERROR = 2,
  FLOWSENTRY_PARSE_ERROR = 3,
  FLOWSENTRY_INFEASIBLE = 4,
  FLOWSENTRY_NUMERICAL_ERROR = 5,
  FLOWSENTRY_UNDEFINED = 6,
  FLOWSENTRY_INTERNAL_ERROR = 7
} flowsentry_status;

typedef struct flowsentry_dataset flowsentry_dataset;
typedef struct flowsentry_sweep_config flowsentry_sweep_config;
typedef struct flowsentry_results flowsentry_results;
typedef struct flowsentry_model flowsentry_model;

FLOWSENTRY_API const char* flowsentry_version(void);
FLOWSENTRY_API const char* flowsentry_status_string(flowsentry_status status);
/* Message of the last failure on this thread; "" if none. */
FLOWSENTRY_API const char* flowsentry_last_error(void);

/* ---- detector kinds -------------------------------------------------- */

FLOWSENTRY_API size_t flowsentry_detector_kind_count(void);
/* NULL when index is out of range. */
FLOWSENTRY_API const char* flowsentry_detector_kind_name(size_t index);
/* Comma-separated list of every kind name. */
FLOWSENTRY_API const char* flowsentry_detector_kind_list(void);
FLOWSENTRY_API int flowsentry_detector_kind_valid(const char* name);

/* ---- datasets -------------------------------------------------------- */

/* label_column / attack_value may be NULL for "Label" / "Attack".
 * dropped_rows (optional) receives the count of rows with NaN/Inf features. */
FLOWSENTRY_API flowsentry_status flowsentry_dataset_load_csv(const char* path, const char* label_column,
                                                             const char* attack_value, flowsentry_dataset** out,
                                                             size_t* dropped_rows);
/* Same as load_csv but skips the listed columns (e.g. flow ids, addresses). */
FLOWSENTRY_API flowsentry_status flowsentry_dataset_load_csv_ex(const char* path, const char* label_column,
                                                                const char* attack_value,
                                                                const char* const* ignore_columns,
                                                                size_t n_ignore, flowsentry_dataset** out,
                                                                size_t* dropped_rows);
FLOWSENTRY_API flowsentry_status flowsentry_dataset_synthesize(size_t n_benign, size_t n_attack, size_t dims,
                                                               double separation, uint64_t seed,
                                                               flowsentry_dataset** out);
/* Row-major values (rows x cols); names may be NULL for f0, f1, ...; labels are 0/1. */
FLOWSENTRY_API flowsentry_status flowsentry_dataset_from_arrays(const double* values, size_t rows, size_t cols,
                                                                const char* const* names, const uint8_t* labels,
                                                                flowsentry_dataset** out);
FLOWSENTRY_API flowsentry_status flowsentry_dataset_write_csv(const flowsentry_dataset* data, const char* path);
FLOWSENTRY_API size_t flowsentry_dataset_rows(const flowsentry_dataset* data);
FLOWSENTRY_API size_t flowsentry_dataset_cols(const flowsentry_dataset* data);
FLOWSENTRY_API size_t flowsentry_dataset_attack_count(const flowsentry_dataset* data);
/* Copies rows*cols values into `out`. */
FLOWSENTRY_API flowsentry_status flowsentry_dataset_copy_features(const flowsentry_dataset* data, double* out,
                                                                  size_t capacity);
FLOWSENTRY_API flowsentry_status flowsentry_dataset_copy_labels(const flowsentry_dataset* data, uint8_t* out,
                                                                size_t capacity);
FLOWSENTRY_API void flowsentry_dataset_free(flowsentry_dataset* data);

/* ---- single detector ------------------------------------------------- */

/* `params` holds n_params "key=value" strings such as "iforest.trees=200". */
FLOWSENTRY_API flowsentry_status flowsentry_model_fit(const char* kind, const char* const* params, size_t n_params,
                                                      double contamination, uint64_t seed, const double* values,
                                                      size_t rows, size_t cols, flowsentry_model** out);
FLOWSENTRY_API flowsentry_status flowsentry_model_score(const flowsentry_model* model, const double* values,
                                                        size_t rows, size_t cols, double* scores);
FLOWSENTRY_API flowsentry_status flowsentry_model_predict(const flowsentry_model* model, const double* values,
                                                          size_t rows, size_t cols, uint8_t* predictions);
FLOWSENTRY_API double flowsentry_model_threshold(const flowsentry_model* model);
FLOWSENTRY_API void flowsentry_model_free(flowsentry_model* model);

FLOWSENTRY_API flowsentry_status flowsentry_roc_auc(const uint8_t* labels, const double* scores, size_t n,
                                                    double* auc);

/* ---- sweeps ---------------------------------------------------------- */

/* Defaults: ratio grid 0.5..0.99, all seven detectors, contamination 0.1,
 * train fraction 0.7, seed 200, one repeat, standardization on, no timings. */
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_create(flowsentry_sweep_config** out);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_ratios(flowsentry_sweep_config* cfg,
                                                                    const double* ratios, size_t n);
/* "start:end:step" or "a,b,c". */
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_parse_ratios(flowsentry_sweep_config* cfg,
                                                                      const char* grid);
/* Replaces the detector list with the comma-separated kinds in `names`. */
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_detectors(flowsentry_sweep_config* cfg,
                                                                       const char* names);
/* Dotted override, e.g. ("iforest.trees", "200"); applies to every detector. */
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_param(flowsentry_sweep_config* cfg, const char* key,
                                                                   const char* value);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_contamination(flowsentry_sweep_config* cfg,
                                                                           double contamination);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_seed(flowsentry_sweep_config* cfg, uint64_t seed);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_repeats(flowsentry_sweep_config* cfg, size_t repeats);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_train_fraction(flowsentry_sweep_config* cfg,
                                                                            double fraction);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_workers(flowsentry_sweep_config* cfg, size_t workers);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_standardize(flowsentry_sweep_config* cfg, int on);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_timings(flowsentry_sweep_config* cfg, int on);
/* Progress lines go to `fn` (e.g. to print on stderr); NULL disables. */
typedef void (*flowsentry_log_fn)(const char* line, void* user);
FLOWSENTRY_API flowsentry_status flowsentry_sweep_config_set_log(flowsentry_sweep_config* cfg, flowsentry_log_fn fn,
                                                                 void* user);
FLOWSENTRY_API void flowsentry_sweep_config_free(flowsentry_sweep_config* cfg);

FLOWSENTRY_API flowsentry_status flowsentry_sweep_run(const flowsentry_sweep_config* cfg,
                                                      const flowsentry_dataset* data, flowsentry_results** out);

/* One result record. String pointers stay valid until the results are freed. */
typedef struct flowsentry_result_row {
  const char* detector;
  double benign_ratio;
  size_t repeat;
  const char* split; /* "train" or "test" */
  int has_auc;
  double auc;
  int has_accuracy;
  double accuracy;
  size_t n_rows;
  size_t n_attack;
  int has_timings;
  double fit_ms;
  double score_ms;
  uint64_t seed;
  const char* warnings; /* "; "-joined, possibly empty */
} flowsentry_result_row;

FLOWSENTRY_API size_t flowsentry_results_count(const flowsentry_results* results);
FLOWSENTRY_API flowsentry_status flowsentry_results_get(const flowsentry_results* results, size_t index,
                                                        flowsentry_result_row* row);
/* format is "csv" or "json". */
FLOWSENTRY_API flowsentry_status flowsentry_results_emit(const flowsentry_results* results, const char* out_dir,
                                                         const char* format);
FLOWSENTRY_API void flowsentry_results_free(flowsentry_results* results);

#ifdef __cplusplus
}
#endif

#endif /* FLOWSENTRY_FLOWSENTRY_H */
