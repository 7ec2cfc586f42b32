/* topicforge C interface.
 *
 * Handles are opaque and single-owner. Every fallible call returns a
 * tf_status; on failure tf_last_error() describes it (per thread, valid
 * until the next failing call on that thread). Strings returned through
 * char** out-parameters are heap copies released with tf_free_string.
 */
#ifndef TOPICFORGE_H
#define TOPICFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(TF_BUILDING_LIBRARY)
#define TF_API __attribute__((visibility("default")))
#else
#define TF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tf_status {
  TF_OK = 0,
  TF_ERR_INVALID_ARGUMENT,
  TF_ERR_IO,
  TF_ERR_MALFORMED_RECORD,
  TF_ERR_DUPLICATE_ID,
  TF_ERR_UNKNOWN_LABEL,
  TF_ERR_UNKNOWN_TOPIC,
  TF_ERR_OVERLAPPING_GROUPS,
  TF_ERR_INVALID_SPEC,
  TF_ERR_EMPTY_TOPIC,
  TF_ERR_ZERO_VECTOR,
  TF_ERR_INVALID_STAGES,
  TF_ERR_INVALID_BUDGET,
  TF_ERR_TARGET_TOO_SMALL,
  TF_ERR_MISSING_ORDERING,
  TF_ERR_SPAWN_FAILURE,
  TF_ERR_HANDSHAKE_FAILURE,
  TF_ERR_EMPTY_STAGE,
  TF_ERR_PROTOCOL,
  TF_ERR_LENGTH_MISMATCH,
  TF_ERR_NO_RELEVANT_CLAIMS,
  TF_ERR_EMPTY_RESULTS,
  TF_ERR_TOPIC_SET_MISMATCH,
  TF_ERR_CONFIG,
  TF_ERR_TOPIC_FAILURE,
  TF_ERR_INTERNAL
} tf_status;

typedef struct tf_corpus tf_corpus;
typedef struct tf_trainer tf_trainer;

TF_API const char* tf_version(void);
TF_API const char* tf_status_name(tf_status status);
TF_API const char* tf_last_error(void);
TF_API void tf_free_string(char* s);

/* Text normalization. config_json may be NULL for the defaults. */
TF_API tf_status tf_normalize_text(const char* raw, const char* config_json, char** out);

/* Corpus.
 * options_json (nullable): {"format": "auto|jsonl|csv|tsv",
 *   "columns": {"id","topic","text","label"}, "normalization": {...}} */
TF_API tf_status tf_corpus_load(const char* path, const char* options_json, tf_corpus** out);
TF_API tf_status tf_corpus_generate(const char* spec_json, uint64_t seed, tf_corpus** out);
/* groups_json: {"new_id": ["a", "b"], ...} */
TF_API tf_status tf_corpus_merge(const tf_corpus* corpus, const char* groups_json, tf_corpus** out);
TF_API tf_status tf_corpus_write(const tf_corpus* corpus, const char* path);
TF_API size_t tf_corpus_size(const tf_corpus* corpus);
TF_API size_t tf_corpus_topic_count(const tf_corpus* corpus);
/* *out stays valid while the corpus lives. */
TF_API tf_status tf_corpus_topic_id(const tf_corpus* corpus, size_t index, const char** out);
TF_API void tf_corpus_free(tf_corpus* corpus);

/* Stage allocation. Output arrays must hold exactly `stages` values. */
TF_API tf_status tf_divisor(int stages, size_t* out);
TF_API tf_status tf_incremental_sizes(size_t budget, int stages, size_t* out, size_t out_len);
TF_API tf_status tf_decremental_source_sizes(size_t n_src, int stages, size_t* out, size_t out_len);
TF_API tf_status tf_equivalent_source_sizes(size_t n_src, int stages, size_t* out, size_t out_len);

/* Source topics ordered by ascending similarity to the few-shot sample drawn
 * with (budget, min_test, seed); CSV "topic_id,similarity". */
TF_API tf_status tf_similarity_order(const tf_corpus* corpus, const char* target, size_t budget,
                                     size_t min_test, uint64_t seed, char** out_csv);

/* Stage plan as JSON: {scheme, target, seed, stages, test_ids}. */
TF_API tf_status tf_plan_build(const tf_corpus* corpus, const char* target, const char* scheme, int stages,
                               size_t budget, size_t min_test, uint64_t seed, char** out_json);

/* Incremental trainer. config_json may be NULL for the built-in defaults. */
TF_API tf_status tf_trainer_create(const char* config_json, tf_trainer** out);
TF_API tf_status tf_trainer_train_stage(tf_trainer* trainer, const char* const* texts, const int* labels,
                                        size_t n);
TF_API tf_status tf_trainer_score(tf_trainer* trainer, const char* const* texts, size_t n, double* out_scores);
TF_API tf_status tf_trainer_reset(tf_trainer* trainer);
TF_API int tf_trainer_stage_counter(const tf_trainer* trainer);
TF_API void tf_trainer_free(tf_trainer* trainer);

/* Evaluation. ap_denominator is "relevant" or "total" (NULL: relevant);
 * format is "json", "csv" or "table" (NULL: table). */
TF_API tf_status tf_average_precision(const int* relevance, size_t n, const char* ap_denominator, double* out);
/* scores_path: id,score CSV/TSV or JSON lines; labels_path: any corpus file.
 * *out_warnings (nullable) lists skipped topics, one per line. */
TF_API tf_status tf_evaluate(const char* scores_path, const char* labels_path, const char* ap_denominator,
                             const char* format, char** out_report, char** out_warnings);
/* Two report JSON files (as written for a single run); rendered deltas. */
TF_API tf_status tf_compare_reports(const char* baseline_path, const char* candidate_path, const char* format,
                                    char** out);

/* Full sweep from a config file. Writes the outputs to the configured
 * directory; *out_summary (nullable) receives the rendered sweep table and
 * a failure summary. jobs = 0 means 1. */
TF_API tf_status tf_run_experiment(const char* config_path, int strict, unsigned jobs, char** out_summary);

#ifdef __cplusplus
}
#endif

#endif
