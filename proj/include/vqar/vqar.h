/* Copyright 2026 The vqar Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the vqar visual question answering pipeline.
 *
 * Every function that can fail returns a vqar_status. On failure the
 * message is available from vqar_last_error() on the same thread until the
 * next call. Strings handed out through char** parameters are owned by the
 * caller and must be released with vqar_string_free().
 */
#ifndef VQAR_VQAR_H_
#define VQAR_VQAR_H_

#include <stddef.h>

#if defined(_WIN32)
#define VQAR_API __declspec(dllexport)
#else
#define VQAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define VQAR_ABI_VERSION 1

typedef enum vqar_status {
    VQAR_OK = 0,
    VQAR_INVALID_ARGUMENT,
    VQAR_CONFIG,
    VQAR_SCHEMA,
    VQAR_MISSING_IMAGE,
    VQAR_IMAGE_DECODE,
    VQAR_TRANSPORT,
    VQAR_BACKEND,
    VQAR_UNSUPPORTED,
    VQAR_SCRIPT_MISS,
    VQAR_DOMAIN,
    VQAR_MISSING_LOGPROBS,
    VQAR_PAIRING,
    VQAR_MISMATCHED_RUNS,
    VQAR_LABEL_MISMATCH,
    VQAR_GATE_FAILURE,
    VQAR_ANSWER_FAILURE,
    VQAR_IO,
    VQAR_INTERNAL
} vqar_status;

typedef struct vqar_pipeline vqar_pipeline;

VQAR_API int vqar_abi_version(void);
VQAR_API const char* vqar_status_string(vqar_status status);
VQAR_API const char* vqar_last_error(void);
VQAR_API void vqar_string_free(char* s);

/* config_path may be NULL for defaults. overrides are "a.b=value" strings. */
VQAR_API vqar_status vqar_pipeline_create(const char* config_path, const char* const* overrides,
                                          size_t n_overrides, vqar_pipeline** out);
/* Relative mock script paths resolve against base_dir (may be NULL). */
VQAR_API vqar_status vqar_pipeline_create_json(const char* config_json, const char* base_dir,
                                               vqar_pipeline** out);
VQAR_API void vqar_pipeline_destroy(vqar_pipeline* p);
VQAR_API vqar_status vqar_pipeline_config(const vqar_pipeline* p, char** config_json);

/* One open-ended question; writes the trace as JSON. */
VQAR_API vqar_status vqar_ask(vqar_pipeline* p, const char* image_path, const char* question, char** trace_json);
/* Same, for a full manifest-style record object. */
VQAR_API vqar_status vqar_ask_record(vqar_pipeline* p, const char* record_json, char** trace_json);

/* Gate only: {"route", "calls", "wall_ms", "decision", "failure"}. */
VQAR_API vqar_status vqar_gate(vqar_pipeline* p, const char* image_path, const char* question,
                               char** result_json);

/* Conceptualizes the image and writes annotated.png (annotated.jpg when the
 * input JPEG is left untouched) plus detections.json into output_dir. */
VQAR_API vqar_status vqar_annotate(vqar_pipeline* p, const char* image_path, const char* question,
                                   const char* output_dir, char** result_json);

/* Writes traces.jsonl and report.json. baseline_dir may be NULL. */
VQAR_API vqar_status vqar_run_benchmark(vqar_pipeline* p, const char* manifest_path, const char* output_dir,
                                        const char* baseline_dir, char** report_json);

VQAR_API vqar_status vqar_score(const char* manifest_path, const char* predictions_path, char** report_json);

/* Runs the gate under each of the three strategies (self-consistency first,
 * as the reference) and writes strategies.csv, strategies.md, modes.svg. */
VQAR_API vqar_status vqar_compare_strategies(vqar_pipeline* p, const char* manifest_path, const char* labels_path,
                                             const char* output_dir, char** table_json);

/* Needs at least two run directories. The first one is the cost baseline.
 * Writes proportions.csv, proportions.md, cost.svg, modes.svg, summary.json. */
VQAR_API vqar_status vqar_report(const char* const* run_dirs, size_t n_dirs, const char* output_dir,
                                 char** summary_json);

/* NaN outside [0,1]. */
VQAR_API double vqar_binary_entropy(double p);
VQAR_API vqar_status vqar_score_vqa_soft(const char* pred, const char* const* gold, size_t n_gold, double* out);

#ifdef __cplusplus
}
#endif

#endif /* VQAR_VQAR_H_ */
