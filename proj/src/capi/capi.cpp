#include "medrex/medrex.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "common/errors.hpp"
#include "common/jsonio.hpp"
#include "common/strings.hpp"
#include "evaluate/evaluate.hpp"
#include "harness/corpus_gen.hpp"
#include "harness/harness.hpp"
#include "ocr/ocr.hpp"
#include "privacy/privacy.hpp"
#include "schema/schema.hpp"

using namespace medrex;

extern "C" {
struct mrex_schema {
  Schema value;
};
}

namespace {

thread_local std::string g_last_error;

mrex_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return MREX_ERR_PARSE;
    case ErrorKind::validation: return MREX_ERR_VALIDATION;
    case ErrorKind::usage: return MREX_ERR_USAGE;
    case ErrorKind::config: return MREX_ERR_CONFIG;
    case ErrorKind::transport: return MREX_ERR_TRANSPORT;
    case ErrorKind::cassette_miss: return MREX_ERR_CASSETTE_MISS;
    case ErrorKind::io: return MREX_ERR_IO;
    case ErrorKind::internal: return MREX_ERR_INTERNAL;
  }
  return MREX_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

template <typename Fn>
mrex_status guarded(Fn&& fn) {
  try {
    fn();
    return MREX_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MREX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MREX_ERR_INTERNAL;
  }
}

mrex_status require(bool ok, const char* message) {
  if (ok) return MREX_OK;
  g_last_error = message;
  return MREX_ERR_USAGE;
}

json violations_json(const std::vector<Violation>& violations) {
  json arr = json::array();
  for (const auto& v : violations)
    arr.push_back({{"path", v.path}, {"rule", v.rule}, {"message", v.message}});
  return arr;
}

}  // namespace

extern "C" {

const char* mrex_version(void) { return "0.1.0"; }

const char* mrex_last_error(void) { return g_last_error.c_str(); }

void mrex_string_free(char* s) { std::free(s); }

mrex_status mrex_schema_load_file(const char* path, mrex_schema** out) {
  if (auto bad = require(path && out, "path and out must be non-null")) return bad;
  return guarded([&] { *out = new mrex_schema{load_schema_file(path)}; });
}

mrex_status mrex_schema_load_text(const char* text, mrex_schema** out) {
  if (auto bad = require(text && out, "text and out must be non-null")) return bad;
  return guarded([&] { *out = new mrex_schema{load_schema(text)}; });
}

void mrex_schema_free(mrex_schema* schema) { delete schema; }

mrex_status mrex_schema_serialize(const mrex_schema* schema, char** out_json) {
  if (auto bad = require(schema && out_json, "schema and out_json must be non-null")) return bad;
  return guarded([&] { *out_json = dup_string(serialize_schema(schema->value)); });
}

mrex_status mrex_schema_stats(const mrex_schema* schema, int* out_version, int* out_scenarios,
                              int* out_detail_fields, int* out_general_fields) {
  if (auto bad = require(schema != nullptr, "schema must be non-null")) return bad;
  if (out_version) *out_version = schema->value.version;
  if (out_scenarios) *out_scenarios = static_cast<int>(schema->value.scenarios.size());
  if (out_detail_fields) *out_detail_fields = static_cast<int>(schema->value.detail_field_count());
  if (out_general_fields) *out_general_fields = static_cast<int>(schema->value.general_fields.size());
  return MREX_OK;
}

mrex_status mrex_schema_validate_file(const char* path, char** out_violations_json) {
  if (auto bad = require(path && out_violations_json, "path and out must be non-null")) return bad;
  return guarded([&] {
    auto [schema, violations] = load_schema_lenient(read_file(path));
    (void)schema;
    *out_violations_json = dup_string(violations_json(violations).dump(2) + "\n");
  });
}

mrex_status mrex_schema_add_scenario(const mrex_schema* schema, const char* scenario_json,
                                     mrex_schema** out) {
  if (auto bad = require(schema && scenario_json && out, "arguments must be non-null")) return bad;
  return guarded([&] {
    ScenarioSpec spec = scenario_from_json_text(scenario_json);
    *out = new mrex_schema{add_scenario(schema->value, std::move(spec))};
  });
}

mrex_status mrex_schema_resolve_field(const mrex_schema* schema, const char* scenario_id,
                                      const char* surface_name, char** out_field_json) {
  if (auto bad = require(schema && surface_name && out_field_json, "arguments must be non-null"))
    return bad;
  return guarded([&] {
    std::optional<std::string> scope;
    if (scenario_id) scope = scenario_id;
    auto ref = resolve_field(schema->value, scope, surface_name);
    if (!ref) {
      *out_field_json = nullptr;
      return;
    }
    json j = json::object();
    j["scenario_id"] = ref->scenario_id;
    j["key"] = ref->spec->key;
    j["value_type"] = value_type_name(ref->spec->value_type);
    j["canonical_unit"] = ref->spec->canonical_unit ? json(*ref->spec->canonical_unit) : json(nullptr);
    *out_field_json = dup_string(j.dump(2) + "\n");
  });
}

mrex_status mrex_ocr_reconstruct_file(const char* path, double line_overlap_ratio, char** out_text) {
  if (auto bad = require(path && out_text, "path and out must be non-null")) return bad;
  return guarded([&] {
    OcrDocument doc = parse_ocr_document_file(path);
    *out_text = dup_string(reconstruct_text(doc, line_overlap_ratio));
  });
}

mrex_status mrex_ocr_reconstruct_text(const char* ocr_json, double line_overlap_ratio,
                                      char** out_text) {
  if (auto bad = require(ocr_json && out_text, "ocr_json and out must be non-null")) return bad;
  return guarded([&] {
    OcrDocument doc = parse_ocr_document(ocr_json);
    *out_text = dup_string(reconstruct_text(doc, line_overlap_ratio));
  });
}

mrex_status mrex_hocr_to_ocr_json(const char* hocr_text, const char* report_id, char** out_ocr_json) {
  if (auto bad = require(hocr_text && report_id && out_ocr_json, "arguments must be non-null"))
    return bad;
  return guarded([&] {
    OcrDocument doc = from_hocr(hocr_text, report_id);
    *out_ocr_json = dup_string(serialize_ocr_document(doc));
  });
}

mrex_status mrex_mask_text(const char* text, const char* detector_config_json,
                           const char* report_id, char** out_masked, char** out_mapping_json) {
  if (auto bad = require(text && out_masked && out_mapping_json, "arguments must be non-null"))
    return bad;
  return guarded([&] {
    DetectorConfig config = detector_config_json ? DetectorConfig::from_json_text(detector_config_json)
                                                 : DetectorConfig::defaults();
    auto detector = make_rule_based_detector(std::move(config));
    auto outcome = mask(text, detector->detect(text), report_id ? report_id : "");
    *out_masked = dup_string(outcome.masked_text);
    *out_mapping_json = dup_string(serialize_mapping_table(outcome.table));
  });
}

mrex_status mrex_restore_text(const char* text, const char* mapping_json, char** out_restored) {
  if (auto bad = require(text && mapping_json && out_restored, "arguments must be non-null"))
    return bad;
  return guarded([&] {
    MappingTable table = parse_mapping_table(mapping_json);
    *out_restored = dup_string(restore(text, table));
  });
}

mrex_status mrex_run_corpus(const char* run_config_json, char** out_summary_json) {
  if (auto bad = require(run_config_json && out_summary_json, "arguments must be non-null"))
    return bad;
  return guarded([&] {
    RunConfig config = run_config_from_json_text(run_config_json);
    RunOutcome outcome = run_corpus(config);
    // A batch where every report failed on transport/replay problems is a
    // provider-level failure, not a result.
    if (outcome.reports > 0 && outcome.failed == outcome.reports &&
        (outcome.first_failure_kind == ErrorKind::transport ||
         outcome.first_failure_kind == ErrorKind::cassette_miss))
      throw Error(outcome.first_failure_kind, outcome.first_failure);
    *out_summary_json = dup_string(outcome.summary.dump(2) + "\n");
  });
}

mrex_status mrex_generate_corpus(const char* spec_json, const char* schema_path,
                                 const char* out_dir, char** out_manifest_json) {
  if (auto bad = require(spec_json && schema_path && out_dir && out_manifest_json,
                         "arguments must be non-null"))
    return bad;
  return guarded([&] {
    CorpusSpec spec = CorpusSpec::from_json_text(spec_json);
    Schema schema = load_schema_file(schema_path);
    json manifest = generate_corpus(spec, schema, out_dir);
    *out_manifest_json = dup_string(manifest.dump(2) + "\n");
  });
}

mrex_status mrex_evaluate_dirs(const char* gold_dir, const char* pred_dir, char** out_metrics_json,
                               char** out_csv_row, char** out_error_report_json) {
  if (auto bad = require(gold_dir && pred_dir, "gold_dir and pred_dir must be non-null")) return bad;
  return guarded([&] {
    EvalOutcome outcome = evaluate_dirs(gold_dir, pred_dir);
    if (out_metrics_json) *out_metrics_json = dup_string(metrics_to_json_text(outcome.metrics));
    if (out_csv_row) *out_csv_row = dup_string(metrics_csv_row(outcome.metrics));
    if (out_error_report_json)
      *out_error_report_json = dup_string(error_report_to_json_text(error_report(outcome.combined)));
  });
}

mrex_status mrex_run_ablation(const char* run_config_json, const char* grid_json,
                              char** out_table_csv) {
  if (auto bad = require(run_config_json && out_table_csv, "arguments must be non-null")) return bad;
  return guarded([&] {
    RunConfig base = run_config_from_json_text(run_config_json);
    std::vector<AblationCell> grid = grid_json ? grid_from_json_text(grid_json) : default_grid();
    run_ablation(base, grid);
    *out_table_csv = dup_string(read_file(base.output_dir / "results" / "table.csv"));
  });
}

}  // extern "C"
