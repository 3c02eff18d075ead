#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evaluate/evaluate.hpp"
#include "gateway/gateway.hpp"
#include "normalize/normalize.hpp"
#include "ocr/ocr.hpp"
#include "privacy/privacy.hpp"
#include "prompt/prompt.hpp"
#include "schema/schema.hpp"

namespace medrex {

enum class Method { chatschema, baseline };

const char* method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

struct RunConfig {
  Method method = Method::chatschema;
  ModalityConfig modality{true, true};
  std::filesystem::path schema_path;
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  ProviderConfig provider;
  bool provider_set = false;  // falls back to the corpus manifest's provider
  bool use_cassette = true;
  std::optional<std::filesystem::path> cassette_path;  // default: corpus cassettes/<cell>.jsonl
  CassetteMode cassette_mode = CassetteMode::replay;
  GatewayOptions gateway;
  DetectorConfig detector = DetectorConfig::defaults();
  std::optional<std::string> templates_dir;
  double line_overlap_ratio = 0.5;
  int workers = 4;
  std::uint64_t seed = 0;
  bool quiet = false;

  // Cell directory / cassette stem, e.g. "chatschema_both".
  std::string cell_name() const;

  // Flags already parsed (method/modality/paths/workers) stay untouched;
  // config files carry provider, cassette, gateway, detector and templates.
  void apply_config_json(const json& j);
};

// Full config from one JSON document (method, modality, schema, corpus,
// output, workers, seed plus everything apply_config_json accepts).
RunConfig run_config_from_json_text(std::string_view text);

// The per-report pipeline, shared by both methods. Consumes the report's OCR
// document plus optional page image and returns a normalized, restored result.
struct PipelineContext {
  const Schema& schema;
  const TemplateSet& templates;
  const EntityDetector& detector;
  Gateway& gateway;
  Method method = Method::chatschema;
  ModalityConfig modality{true, true};
  double line_overlap_ratio = 0.5;
};

ExtractionResult run_report(const OcrDocument& doc,
                            const std::optional<std::vector<std::uint8_t>>& image,
                            const PipelineContext& ctx);

struct RunOutcome {
  int reports = 0;
  int failed = 0;
  std::optional<MetricsReport> metrics;  // present when the corpus ships gold
  std::vector<std::string> warnings;
  ErrorKind first_failure_kind = ErrorKind::internal;
  std::string first_failure;
  json summary;  // what run writes to summary.json
};

// Processes every report under corpus_dir/reports with a bounded worker pool;
// a failing report is written as an empty result flagged failed and never
// aborts the batch. Outputs land under config.output_dir.
RunOutcome run_corpus(const RunConfig& config);

std::optional<json> load_corpus_manifest(const std::filesystem::path& corpus_dir);

struct AblationCell {
  Method method = Method::chatschema;
  ModalityConfig modality{true, true};
};

// Parses {"methods": [...], "modalities": [...]} or {"cells": [...]}.
std::vector<AblationCell> grid_from_json_text(std::string_view text);
std::vector<AblationCell> default_grid();

// Runs every cell over the corpus, writes results/<cell>/..., results/table.csv
// (Method,Text,Image + the seven metric columns, percent one decimal) and
// results/ablation.json. Per-cell failures are recorded, other cells proceed.
json run_ablation(const RunConfig& base, const std::vector<AblationCell>& grid);

// Evaluates pred/*.json against gold/*.json (paired by report id). Returns
// the aggregate plus per-report breakdowns for error reporting.
struct EvalOutcome {
  MetricsReport metrics;
  ConfusionBreakdown combined;
  std::vector<std::string> warnings;
  int reports = 0;
};

EvalOutcome evaluate_dirs(const std::filesystem::path& gold_dir,
                          const std::filesystem::path& pred_dir);

}  // namespace medrex
