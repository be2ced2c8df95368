/*
 * C interface to the long-form QA retrieval and evaluation engine.
 *
 * Objects are opaque handles created by lfqa_*_open/create functions and
 * released with the matching lfqa_*_free. Every fallible call returns an
 * lfqa_status; on failure lfqa_last_error() describes the problem (the
 * message is per thread and valid until the next failing call on that
 * thread). Strings returned through lfqa_string** are owned by the caller.
 */
#ifndef LFQA_LFQA_H
#define LFQA_LFQA_H

#include <stddef.h>
#include <stdint.h>

#if defined(LFQA_BUILDING_LIBRARY)
#define LFQA_API __attribute__((visibility("default")))
#else
#define LFQA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lfqa_status {
  LFQA_OK = 0,
  LFQA_ERR_INVALID_ARGUMENT = 1,
  LFQA_ERR_IO = 2,
  LFQA_ERR_PARSE = 3,
  LFQA_ERR_FORMAT = 4,
  LFQA_ERR_DUPLICATE_ID = 5,
  LFQA_ERR_NOT_FOUND = 6,
  LFQA_ERR_DIM_MISMATCH = 7,
  LFQA_ERR_BUDGET = 8,
  LFQA_ERR_CONNECTION = 9,
  LFQA_ERR_TIMEOUT = 10,
  LFQA_ERR_REMOTE = 11,
  LFQA_ERR_CONTRACT = 12,
  LFQA_ERR_INTERNAL = 13
} lfqa_status;

typedef enum lfqa_text_unit { LFQA_TEXT_QA = 0, LFQA_TEXT_QUESTION = 1 } lfqa_text_unit;

typedef enum lfqa_report_format { LFQA_REPORT_MARKDOWN = 0, LFQA_REPORT_CSV = 1 } lfqa_report_format;

LFQA_API const char* lfqa_version(void);
LFQA_API const char* lfqa_status_string(lfqa_status status);
LFQA_API const char* lfqa_last_error(void);

/* Owned, NUL-terminated UTF-8 text. */
typedef struct lfqa_string lfqa_string;
LFQA_API const char* lfqa_string_data(const lfqa_string* s);
LFQA_API size_t lfqa_string_size(const lfqa_string* s);
LFQA_API void lfqa_string_free(lfqa_string* s);

/* ---- corpus ------------------------------------------------------------ */

typedef struct lfqa_corpus lfqa_corpus;

/* Reads JSONL (id, question, answer, optional source) and cleans every pair.
 * abbreviations_tsv may be NULL. strict != 0 makes malformed lines fatal. */
LFQA_API lfqa_status lfqa_corpus_ingest(const char* path, const char* abbreviations_tsv,
                                        int strict, lfqa_corpus** out);
LFQA_API lfqa_status lfqa_corpus_synthetic(size_t count, uint64_t seed, lfqa_corpus** out);
LFQA_API size_t lfqa_corpus_size(const lfqa_corpus* corpus);
/* JSON array of warning strings collected during ingestion. */
LFQA_API lfqa_status lfqa_corpus_warnings(const lfqa_corpus* corpus, lfqa_string** out);
/* JSON object: pair_count, mean_question_tokens, mean_answer_tokens, per_source. */
LFQA_API lfqa_status lfqa_corpus_stats(const lfqa_corpus* corpus, lfqa_string** out);
LFQA_API lfqa_status lfqa_corpus_write(const lfqa_corpus* corpus, const char* path);
/* Writes the (id, partition) manifest; summary is a JSON object of sizes. */
LFQA_API lfqa_status lfqa_corpus_split(const lfqa_corpus* corpus, double train, double validation,
                                       double test, uint64_t seed, const char* manifest_path,
                                       lfqa_string** summary);
/* Stub sentence store (and token store when token_path is not NULL). */
LFQA_API lfqa_status lfqa_corpus_embed_stub(const lfqa_corpus* corpus, uint32_t dim, uint64_t seed,
                                            lfqa_text_unit unit, const char* sentence_path,
                                            const char* token_path);
LFQA_API void lfqa_corpus_free(lfqa_corpus* corpus);

LFQA_API lfqa_status lfqa_clean_text(const char* raw, const char* abbreviations_tsv,
                                     lfqa_string** out);

/* ---- embeddings -------------------------------------------------------- */

LFQA_API lfqa_status lfqa_stub_embed(const char* text, uint32_t dim, uint64_t seed, float* out,
                                     size_t out_len);
LFQA_API lfqa_status lfqa_cosine(const float* u, const float* v, size_t dim, double* out);

/* ---- flat L2 index ----------------------------------------------------- */

typedef struct lfqa_index lfqa_index;

typedef struct lfqa_neighbor {
  const char* id;  /* owned by the index */
  double distance; /* squared L2 */
} lfqa_neighbor;

LFQA_API lfqa_status lfqa_index_open(const char* sentence_store_path, lfqa_index** out);
LFQA_API uint32_t lfqa_index_dim(const lfqa_index* index);
LFQA_API size_t lfqa_index_size(const lfqa_index* index);
/* JSON sidecar {dim, count, checksum} of the store the index was built from. */
LFQA_API lfqa_status lfqa_index_write_manifest(const lfqa_index* index, const char* path);
/* `out` must have room for k entries; *out_count receives min(k, size). */
LFQA_API lfqa_status lfqa_index_search(const lfqa_index* index, const float* query, size_t dim,
                                       size_t k, lfqa_neighbor* out, size_t* out_count);
LFQA_API void lfqa_index_free(lfqa_index* index);

/* ---- pipeline: corpus + index + re-rankers + generator ------------------ */

typedef struct lfqa_pipeline lfqa_pipeline;

/* config_json uses the experiment configuration schema; relative paths are
 * resolved against base_dir (may be NULL). */
LFQA_API lfqa_status lfqa_pipeline_open(const char* config_json, const char* base_dir,
                                        lfqa_pipeline** out);
/* query_id selects a precomputed query embedding when the config names a
 * query store; it may be NULL otherwise. Results are JSON arrays. */
LFQA_API lfqa_status lfqa_pipeline_retrieve(const lfqa_pipeline* pipeline, const char* query,
                                            const char* query_id, size_t k, lfqa_string** out);
LFQA_API lfqa_status lfqa_pipeline_rerank(const lfqa_pipeline* pipeline, const char* query,
                                          const char* query_id, const char* strategy, size_t k,
                                          size_t n, lfqa_string** out);
/* Retrieve, re-rank, assemble and generate; JSON object with the prompt
 * bundle and the generation response. */
LFQA_API lfqa_status lfqa_pipeline_answer(const lfqa_pipeline* pipeline, const char* query,
                                          const char* query_id, const char* strategy,
                                          lfqa_string** out);
LFQA_API void lfqa_pipeline_free(lfqa_pipeline* pipeline);

/* ---- prompts and generation -------------------------------------------- */

/* contexts_json: array of {question, answer[, id, rank, score]} in rank
 * order (the output of lfqa_pipeline_rerank is accepted as is).
 * tokenizer_endpoint may be NULL for whitespace token counting. */
LFQA_API lfqa_status lfqa_assemble_prompt(const char* query, const char* contexts_json,
                                          size_t budget, int reverse_contexts,
                                          const char* tokenizer_endpoint, lfqa_string** out);
/* request_json: {prompt[, beam_size, length_penalty, max_new_tokens]}. */
LFQA_API lfqa_status lfqa_generate(const char* endpoint, long timeout_ms, int retries,
                                   const char* request_json, lfqa_string** out);

/* ---- metrics ------------------------------------------------------------ */

typedef struct lfqa_metric_options {
  uint32_t embed_dim;  /* stub BERTScore embedding dimension */
  uint64_t embed_seed;
  double meteor_gamma;
  double meteor_theta;
  int meteor_stem;
} lfqa_metric_options;

typedef struct lfqa_metric_row {
  double bleu1;
  double rouge1;
  double bertscore_p;
  int has_bertscore;
  double meteor;
  int degenerate;
} lfqa_metric_row;

typedef struct lfqa_metric_summary {
  size_t count;
  double bleu1;
  double rouge1;
  double bertscore_p;
  int has_bertscore;
  double meteor;
  size_t degenerate;
  size_t bertscore_excluded;
} lfqa_metric_summary;

LFQA_API void lfqa_metric_options_default(lfqa_metric_options* options);
LFQA_API lfqa_status lfqa_evaluate_pair(const char* generated, const char* reference,
                                        const lfqa_metric_options* options, lfqa_metric_row* out);
LFQA_API lfqa_status lfqa_aggregate(const lfqa_metric_row* rows, size_t count,
                                    lfqa_metric_summary* out);

/* ---- experiments and result tables ------------------------------------- */

typedef struct lfqa_table lfqa_table;

LFQA_API lfqa_status lfqa_experiment_run(const char* config_json, const char* base_dir,
                                         lfqa_table** out);
LFQA_API lfqa_status lfqa_table_create(lfqa_table** out);
/* has_bertscore == 0 leaves the BERTScore cell empty ("n/a"). */
LFQA_API lfqa_status lfqa_table_add_row(lfqa_table* table, const char* label, double bleu1,
                                        double rouge1, double bertscore, int has_bertscore,
                                        double meteor);
LFQA_API lfqa_status lfqa_table_read_csv(const char* path, lfqa_table** out);
LFQA_API size_t lfqa_table_rows(const lfqa_table* table);
LFQA_API lfqa_status lfqa_table_render(const lfqa_table* table, lfqa_report_format format,
                                       lfqa_string** out);
LFQA_API lfqa_status lfqa_table_emit(const lfqa_table* table, lfqa_report_format format,
                                     const char* path);
LFQA_API lfqa_status lfqa_table_compare(const lfqa_table* a, const lfqa_table* b,
                                        lfqa_report_format format, lfqa_string** out);
LFQA_API void lfqa_table_free(lfqa_table* table);

#ifdef __cplusplus
}
#endif

#endif /* LFQA_LFQA_H */
