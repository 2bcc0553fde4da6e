/* C interface to the authdrift library.
 *
 * Handles are opaque and owned by the caller (free with the matching
 * *_free function). Every call returning authdrift_status leaves a message
 * retrievable with authdrift_last_error() on failure; the message is
 * thread-local and valid until the next failing call on the same thread.
 * Strings returned through char** are released with authdrift_string_free.
 */
#ifndef AUTHDRIFT_AUTHDRIFT_H_
#define AUTHDRIFT_AUTHDRIFT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(AUTHDRIFT_BUILDING_LIBRARY)
#define AUTHDRIFT_API __attribute__((visibility("default")))
#else
#define AUTHDRIFT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum authdrift_status {
  AUTHDRIFT_OK = 0,
  AUTHDRIFT_E_INVALID_ARGUMENT = 1,
  AUTHDRIFT_E_IO = 2,
  AUTHDRIFT_E_PARSE = 3,
  AUTHDRIFT_E_CONSTRAINT = 4,
  AUTHDRIFT_E_PROTOCOL = 5,
  AUTHDRIFT_E_TIMEOUT = 6,
  AUTHDRIFT_E_UNDEFINED = 7, /* e.g. correlation of a constant series */
  AUTHDRIFT_E_INTERNAL = 8
} authdrift_status;

typedef enum authdrift_log_level {
  AUTHDRIFT_LOG_DEBUG = 0,
  AUTHDRIFT_LOG_INFO = 1,
  AUTHDRIFT_LOG_WARNING = 2
} authdrift_log_level;

typedef void (*authdrift_log_fn)(authdrift_log_level level, const char* message, void* user);

AUTHDRIFT_API const char* authdrift_version(void);
AUTHDRIFT_API const char* authdrift_last_error(void);
AUTHDRIFT_API const char* authdrift_status_name(authdrift_status status);
/* NULL fn disables logging (the default). */
AUTHDRIFT_API void authdrift_set_log_handler(authdrift_log_fn fn, void* user);
AUTHDRIFT_API void authdrift_string_free(char* s);

/* ---- corpus ---- */

typedef struct authdrift_corpus authdrift_corpus;

typedef enum authdrift_token_unit {
  AUTHDRIFT_TOKENS_UNICODE_CHAR = 0,
  AUTHDRIFT_TOKENS_WHITESPACE = 1
} authdrift_token_unit;

typedef struct authdrift_corpus_summary {
  size_t documents;
  size_t authors;
  size_t paragraphs;
  size_t admissible_paragraphs;
  size_t admissible_documents;
  size_t admissible_authors;
} authdrift_corpus_summary;

AUTHDRIFT_API authdrift_status authdrift_corpus_ingest(const char* manifest_path, authdrift_token_unit unit,
                                                       size_t min_tokens, authdrift_corpus** out);
AUTHDRIFT_API authdrift_status authdrift_corpus_load(const char* path, authdrift_corpus** out);
AUTHDRIFT_API authdrift_status authdrift_corpus_save(const authdrift_corpus* corpus, const char* path);
AUTHDRIFT_API authdrift_status authdrift_corpus_summarize(const authdrift_corpus* corpus,
                                                          authdrift_corpus_summary* out);
AUTHDRIFT_API void authdrift_corpus_free(authdrift_corpus* corpus);

/* Synthetic Markov-chain corpus; *manifest_path receives the manifest written
 * under dir. */
AUTHDRIFT_API authdrift_status authdrift_synth_write(const char* dir, size_t authors, uint64_t seed,
                                                     char** manifest_path);

/* ---- pair generation ---- */

typedef struct authdrift_pairgen_options {
  uint64_t seed;
  int horizon;
  int include_same_doc;
  double ratio_train;
  double ratio_dev;
  double ratio_test;
  size_t max_combined;
  size_t reserve;
  /* JSON object {"train": {"SAME_DOC": n, ...}, "dev": ..., "test": ...,
   * "focus": ...}, or a full spec {"horizon", "include_same_doc", "sets"}
   * whose values then take precedence. NULL selects the reference quotas
   * times quota_scale. */
  const char* quotas_json;
  double quota_scale;
  const char* const* focus_authors;
  size_t n_focus_authors;
} authdrift_pairgen_options;

AUTHDRIFT_API void authdrift_pairgen_options_init(authdrift_pairgen_options* options);

/* With only_set NULL, out_path is a directory receiving <set>.jsonl for every
 * generated set plus split.json. Otherwise only that set is written, to the
 * file out_path. *report (optional) receives a JSON description of the
 * split, the written files and any warnings. */
AUTHDRIFT_API authdrift_status authdrift_pairgen_run(const authdrift_corpus* corpus,
                                                     const authdrift_pairgen_options* options,
                                                     const char* out_path, const char* only_set,
                                                     char** report);

/* ---- datasets and feature models ---- */

typedef struct authdrift_dataset authdrift_dataset;
typedef struct authdrift_model authdrift_model;

AUTHDRIFT_API authdrift_status authdrift_dataset_load(const char* path, authdrift_dataset** out);
AUTHDRIFT_API size_t authdrift_dataset_size(const authdrift_dataset* dataset);
AUTHDRIFT_API const char* authdrift_dataset_name(const authdrift_dataset* dataset);
AUTHDRIFT_API void authdrift_dataset_free(authdrift_dataset* dataset);

AUTHDRIFT_API authdrift_status authdrift_model_build(const authdrift_dataset* train, int n, size_t max_size,
                                                     authdrift_model** out);
AUTHDRIFT_API authdrift_status authdrift_model_save(const authdrift_model* model, const char* path);
AUTHDRIFT_API authdrift_status authdrift_model_load(const char* path, authdrift_model** out);
AUTHDRIFT_API size_t authdrift_model_vocab_size(const authdrift_model* model);
AUTHDRIFT_API void authdrift_model_free(authdrift_model* model);

/* ---- verification ---- */

typedef struct authdrift_results authdrift_results;

typedef struct authdrift_result {
  const char* sample_id; /* owned by the results handle */
  int truth;
  int label;
  double score;
  double confidence;
} authdrift_result;

typedef struct authdrift_impostor_params {
  int iterations;
  double feature_fraction;
  int pool_size;
  int impostors_per_iter;
  double threshold;
} authdrift_impostor_params;

AUTHDRIFT_API void authdrift_impostor_params_init(authdrift_impostor_params* params);
AUTHDRIFT_API authdrift_status authdrift_impostors_run(const authdrift_model* model, const authdrift_dataset* pool,
                                                       const authdrift_dataset* test,
                                                       const authdrift_impostor_params* params, uint64_t seed,
                                                       authdrift_results** out);

typedef struct authdrift_endpoint_options {
  const char* command; /* run via /bin/sh -c; or NULL */
  const char* url;     /* HTTP base URL; or NULL */
  double timeout_seconds;
  size_t window;
} authdrift_endpoint_options;

AUTHDRIFT_API void authdrift_endpoint_options_init(authdrift_endpoint_options* options);
AUTHDRIFT_API authdrift_status authdrift_external_run(const authdrift_dataset* test,
                                                      const authdrift_endpoint_options* options,
                                                      authdrift_results** out);

AUTHDRIFT_API authdrift_status authdrift_results_load(const char* path, authdrift_results** out);
AUTHDRIFT_API authdrift_status authdrift_results_save(const authdrift_results* results, const char* path);
AUTHDRIFT_API size_t authdrift_results_size(const authdrift_results* results);
AUTHDRIFT_API authdrift_status authdrift_results_get(const authdrift_results* results, size_t index,
                                                     authdrift_result* out);
AUTHDRIFT_API void authdrift_results_free(authdrift_results* results);

/* ---- evaluation ---- */

typedef enum authdrift_mcnemar_method {
  AUTHDRIFT_MCNEMAR_AUTO = 0,
  AUTHDRIFT_MCNEMAR_CHI2 = 1,
  AUTHDRIFT_MCNEMAR_EXACT = 2
} authdrift_mcnemar_method;

typedef struct authdrift_eval_options {
  int bucket_width;
  authdrift_mcnemar_method mcnemar;
  int majority_vote; /* nonzero: vote across runs instead of pooling */
} authdrift_eval_options;

/* One named test set with the runs of one or two classifiers on it. */
typedef struct authdrift_eval_set {
  const char* name; /* NULL: the dataset's set name */
  const authdrift_dataset* dataset;
  const authdrift_results* const* runs;
  size_t n_runs;
  const authdrift_results* const* runs_b; /* optional second classifier */
  size_t n_runs_b;
} authdrift_eval_set;

AUTHDRIFT_API void authdrift_eval_options_init(authdrift_eval_options* options);
/* Writes the CSV report files into out_dir; *summary (optional) receives
 * the text of summary.txt. */
AUTHDRIFT_API authdrift_status authdrift_eval_report(const authdrift_eval_set* sets, size_t n_sets,
                                                     const authdrift_eval_options* options, const char* out_dir,
                                                     char** summary);

/* ---- statistics ---- */

AUTHDRIFT_API authdrift_status authdrift_minmax_dense(const double* x, const double* y, size_t n, double* out);
AUTHDRIFT_API authdrift_status authdrift_prf(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn,
                                             int positive_class, double* precision, double* recall, double* f1);
AUTHDRIFT_API authdrift_status authdrift_pearson(const double* xs, const double* ys, size_t n, double* r, double* p);
AUTHDRIFT_API authdrift_status authdrift_mcnemar(uint64_t b, uint64_t c, authdrift_mcnemar_method method,
                                                 double* statistic, double* p, authdrift_mcnemar_method* used);

/* ---- pipeline ---- */

/* overrides_json: JSON merge patch applied to the config, or NULL.
 * *summary (optional) receives {"out_dir", "stages": [{"name", "skipped"}],
 * "report"}. */
AUTHDRIFT_API authdrift_status authdrift_pipeline_run(const char* config_path, const char* overrides_json,
                                                      char** summary);
/* Writes a synthetic corpus and a pipeline config under dir. */
AUTHDRIFT_API authdrift_status authdrift_demo_write(const char* dir, uint64_t seed, char** config_path);

#ifdef __cplusplus
}
#endif

#endif /* AUTHDRIFT_AUTHDRIFT_H_ */
