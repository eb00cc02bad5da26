#ifndef ASKHINT_H
#define ASKHINT_H

/* This file is generated by cbindgen from crates/askhint-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by fallible calls.
typedef enum AskhintStatus {
  ASKHINT_STATUS_OK = 0,
  ASKHINT_STATUS_NULL_POINTER = 1,
  ASKHINT_STATUS_INVALID_ARGUMENT = 2,
  ASKHINT_STATUS_UTF8 = 3,
  ASKHINT_STATUS_PARSE_ERROR = 4,
  ASKHINT_STATUS_PANIC = 5,
} AskhintStatus;

// Answer grammar selector for `askhint_parse_verdict`.
typedef enum AskhintAnswerFormat {
  ASKHINT_ANSWER_FORMAT_STRUCTURED = 0,
  ASKHINT_ANSWER_FORMAT_JSON_LABEL = 1,
} AskhintAnswerFormat;

// Decision values: 0 normal, 1 abnormal.
typedef enum AskhintDecision {
  ASKHINT_DECISION_NORMAL = 0,
  ASKHINT_DECISION_ABNORMAL = 1,
} AskhintDecision;

// Parse status values: 0 clean, 1 recovered, 2 failed.
typedef enum AskhintParseStatus {
  ASKHINT_PARSE_STATUS_CLEAN = 0,
  ASKHINT_PARSE_STATUS_RECOVERED = 1,
  ASKHINT_PARSE_STATUS_FAILED = 2,
} AskhintParseStatus;

// Opaque compact grouped question set.
typedef struct AskhintCompactSet AskhintCompactSet;

// Opaque class-wise guiding-question pool.
typedef struct AskhintPool AskhintPool;

// Opaque parsed verdict.
typedef struct AskhintVerdict AskhintVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread; do not free it.
const char *askhint_last_error_message(void);

// Library version as a static string; do not free.
const char *askhint_version_string(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by an askhint function that
// documents caller-owned strings, or null.
void askhint_string_free(char *s);

// ROC-AUC of `scores` against binary `labels` (1 = abnormal), tied pairs
// credited 0.5. Fails with `INVALID_ARGUMENT` unless both label values
// occur.
//
// # Safety
// `scores` and `labels` must point to `len` readable elements; `out_auc`
// must be a valid writable pointer.
enum AskhintStatus askhint_compute_auc(const double *scores,
                                       const uint8_t *labels,
                                       size_t len,
                                       double *out_auc);

// Samples frame indices for a stored sequence of `n_frames` frames. Pass
// `fps_native <= 0` or `duration_s <= 0` when unknown. Writes up to
// `capacity` indices into `out_indices` and the true count into `out_len`;
// fails with `INVALID_ARGUMENT` when the capacity is too small (use
// `max_frames` as a safe capacity).
//
// # Safety
// `out_indices` must point to `capacity` writable elements; `out_len` must
// be a valid writable pointer.
enum AskhintStatus askhint_sample_frame_indices(size_t n_frames,
                                                double fps_native,
                                                double duration_s,
                                                size_t max_frames,
                                                size_t *out_indices,
                                                size_t capacity,
                                                size_t *out_len);

// Parses one model reply. Never fails on content: unparseable text yields
// a verdict with `ASKHINT_PARSE_STATUS_FAILED`. Returns null only for
// invalid pointers/UTF-8. Free with `askhint_verdict_free`.
//
// # Safety
// `video_id` and `text` must be valid NUL-terminated strings.
struct AskhintVerdict *askhint_parse_verdict(const char *video_id,
                                             const char *text,
                                             enum AskhintAnswerFormat format);

// # Safety
// `verdict` must come from `askhint_parse_verdict` and not be freed.
enum AskhintDecision askhint_verdict_decision(const struct AskhintVerdict *verdict);

// Anomaly score in [0, 1]; 0 for a null handle.
//
// # Safety
// `verdict` must come from `askhint_parse_verdict` and not be freed.
double askhint_verdict_score(const struct AskhintVerdict *verdict);

// # Safety
// `verdict` must come from `askhint_parse_verdict` and not be freed.
enum AskhintParseStatus askhint_verdict_parse_status(const struct AskhintVerdict *verdict);

// Group name for abnormal verdicts, or null when absent. Caller frees with
// `askhint_string_free`.
//
// # Safety
// `verdict` must come from `askhint_parse_verdict` and not be freed.
char *askhint_verdict_group(const struct AskhintVerdict *verdict);

// Rationale text (possibly empty). Caller frees with `askhint_string_free`.
//
// # Safety
// `verdict` must come from `askhint_parse_verdict` and not be freed.
char *askhint_verdict_rationale(const struct AskhintVerdict *verdict);

// # Safety
// `verdict` must come from `askhint_parse_verdict`; double-free is UB.
void askhint_verdict_free(struct AskhintVerdict *verdict);

// Parses the line-oriented pool format (`## Class` headers, one question
// per line). Null on failure; see `askhint_last_error_message`.
//
// # Safety
// `text` must be a valid NUL-terminated string.
struct AskhintPool *askhint_pool_load(const char *text);

// # Safety
// `pool` must come from `askhint_pool_load` and not be freed.
size_t askhint_pool_class_count(const struct AskhintPool *pool);

// # Safety
// `pool` must come from `askhint_pool_load` and not be freed.
size_t askhint_pool_question_count(const struct AskhintPool *pool);

// Renders the monolithic full-pool baseline prompt (strict raw-JSON output
// schema). Caller frees with `askhint_string_free`.
//
// # Safety
// `pool` must come from `askhint_pool_load` and not be freed.
char *askhint_pool_full_prompt(const struct AskhintPool *pool);

// # Safety
// `pool` must come from `askhint_pool_load`; double-free is UB.
void askhint_pool_free(struct AskhintPool *pool);

// Parses the canonical compact-set format (`## Group` headers with an
// optional `@classes:` line). Null on failure.
//
// # Safety
// `text` must be a valid NUL-terminated string.
struct AskhintCompactSet *askhint_compact_set_load(const char *text);

// # Safety
// `set` must come from `askhint_compact_set_load` and not be freed.
size_t askhint_compact_set_group_count(const struct AskhintCompactSet *set);

// # Safety
// `set` must come from `askhint_compact_set_load` and not be freed.
size_t askhint_compact_set_question_count(const struct AskhintCompactSet *set);

// Renders the structured two-task inference prompt for this set. Caller
// frees with `askhint_string_free`.
//
// # Safety
// `set` must come from `askhint_compact_set_load` and not be freed.
char *askhint_compact_set_render_prompt(const struct AskhintCompactSet *set);

// # Safety
// `set` must come from `askhint_compact_set_load`; double-free is UB.
void askhint_compact_set_free(struct AskhintCompactSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASKHINT_H */
