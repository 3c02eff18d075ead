/*
 * medrex - schema-guided extraction of key-value records from OCR'd medical
 * reports, with a two-stage classify-then-extract pipeline, reversible PII
 * masking, record/replay access to multimodal chat models, and an evaluation
 * harness.
 *
 * C ABI over the C++ core. Every function returns mrex_status; on failure the
 * thread-local message from mrex_last_error() describes what went wrong.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with mrex_string_free().
 */

#ifndef MEDREX_H
#define MEDREX_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrex_status {
  MREX_OK = 0,
  MREX_ERR_PARSE = 1,
  MREX_ERR_VALIDATION = 2,
  MREX_ERR_USAGE = 3,
  MREX_ERR_CONFIG = 4,
  MREX_ERR_TRANSPORT = 5,
  MREX_ERR_CASSETTE_MISS = 6,
  MREX_ERR_IO = 7,
  MREX_ERR_INTERNAL = 8
} mrex_status;

/* Opaque, immutable schema handle. */
typedef struct mrex_schema mrex_schema;

const char* mrex_version(void);

/* Message for the most recent failure on this thread. */
const char* mrex_last_error(void);

void mrex_string_free(char* s);

/* ---- schema ---- */

mrex_status mrex_schema_load_file(const char* path, mrex_schema** out);
mrex_status mrex_schema_load_text(const char* text, mrex_schema** out);
void mrex_schema_free(mrex_schema* schema);

mrex_status mrex_schema_serialize(const mrex_schema* schema, char** out_json);
mrex_status mrex_schema_stats(const mrex_schema* schema, int* out_version, int* out_scenarios,
                              int* out_detail_fields, int* out_general_fields);

/*
 * Validates a schema file. Returns MREX_OK with a JSON array of violations
 * (empty when the file is valid); each violation carries "path", "rule" and
 * "message". Only unreadable or non-JSON input yields a non-OK status.
 */
mrex_status mrex_schema_validate_file(const char* path, char** out_violations_json);

/* Pure derivation: adds a scenario (JSON object) and bumps the version. */
mrex_status mrex_schema_add_scenario(const mrex_schema* schema, const char* scenario_json,
                                     mrex_schema** out);

/*
 * Resolves a surface name (key or alias) to its field. scenario_id may be
 * NULL to search every scope. On a hit *out_field_json carries the field
 * spec with its owning scope; on a miss it is set to NULL (status MREX_OK).
 */
mrex_status mrex_schema_resolve_field(const mrex_schema* schema, const char* scenario_id,
                                      const char* surface_name, char** out_field_json);

/* ---- ocr ---- */

mrex_status mrex_ocr_reconstruct_file(const char* path, double line_overlap_ratio, char** out_text);
mrex_status mrex_ocr_reconstruct_text(const char* ocr_json, double line_overlap_ratio,
                                      char** out_text);

/* Best-effort hOCR conversion into the native OCR document JSON. */
mrex_status mrex_hocr_to_ocr_json(const char* hocr_text, const char* report_id, char** out_ocr_json);

/* ---- privacy ---- */

/*
 * Masks sensitive entities. detector_config_json may be NULL for the default
 * rule set. Returns the masked text plus the mapping-table sidecar JSON.
 */
mrex_status mrex_mask_text(const char* text, const char* detector_config_json,
                           const char* report_id, char** out_masked, char** out_mapping_json);
mrex_status mrex_restore_text(const char* text, const char* mapping_json, char** out_restored);

/* ---- pipeline ---- */

/*
 * Runs one method/modality cell over a corpus directory. run_config_json:
 * {
 *   "method": "chatschema"|"baseline", "modality": "text"|"image"|"both",
 *   "schema": "<path>", "corpus": "<dir>", "output": "<dir>",
 *   "workers": 4, "seed": 0,
 *   "provider": {"kind": "openai"|"gemini"|"mock", "base_url": "...",
 *                 "model": "...", "api_key_env": "..."},   // default: corpus manifest
 *   "cassette": {"path": "...", "mode": "record"|"replay"} // default: corpus cassette, replay
 *   "gateway": {"rate_limit_per_minute": 30, "max_retries": 3, ...},
 *   "detector": {...}, "templates_dir": "...", "line_overlap_ratio": 0.5
 * }
 * Individual report failures are contained (written as failed results); the
 * returned summary JSON mirrors output/summary.json.
 */
mrex_status mrex_run_corpus(const char* run_config_json, char** out_summary_json);

/* Seeded synthetic corpus with manifest-recorded injected errors. */
mrex_status mrex_generate_corpus(const char* spec_json, const char* schema_path,
                                 const char* out_dir, char** out_manifest_json);

/*
 * Matches predictions against gold annotations. Outputs the aggregate metrics
 * JSON, the percent CSV row "key_p,key_r,key_f1,acc,p,r,f1", and the
 * categorized error report JSON.
 */
mrex_status mrex_evaluate_dirs(const char* gold_dir, const char* pred_dir, char** out_metrics_json,
                               char** out_csv_row, char** out_error_report_json);

/*
 * Runs a method x modality grid over the corpus. grid_json may be NULL for
 * the full six-cell grid, or {"methods": [...], "modalities": [...]} /
 * {"cells": [{"method": ..., "modality": ...}]}. Writes results/table.csv and
 * results/ablation.json under the output directory and returns the table CSV.
 */
mrex_status mrex_run_ablation(const char* run_config_json, const char* grid_json,
                              char** out_table_csv);

#ifdef __cplusplus
}
#endif

#endif /* MEDREX_H */
