#include "harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "common/strings.hpp"

namespace medrex {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::string text = read_file(path);
  return {text.begin(), text.end()};
}

void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto body = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(body);
  for (auto& t : threads) t.join();
}

std::optional<std::vector<std::uint8_t>> load_report_image(const fs::path& corpus_dir,
                                                           const OcrDocument& doc) {
  std::vector<fs::path> candidates;
  if (doc.source_image_ref) candidates.push_back(corpus_dir / *doc.source_image_ref);
  for (const char* ext : {".png", ".jpg", ".jpeg", ".bmp"})
    candidates.push_back(corpus_dir / "images" / (doc.report_id + ext));
  for (const auto& p : candidates)
    if (fs::exists(p)) return read_bytes(p);
  return std::nullopt;
}

}  // namespace

const char* method_name(Method m) {
  return m == Method::chatschema ? "chatschema" : "baseline";
}

std::optional<Method> method_from_name(std::string_view name) {
  if (name == "chatschema") return Method::chatschema;
  if (name == "baseline") return Method::baseline;
  return std::nullopt;
}

std::string RunConfig::cell_name() const {
  return std::string(method_name(method)) + "_" + modality_name(modality);
}

void RunConfig::apply_config_json(const json& j) {
  if (j.contains("provider")) {
    provider = ProviderConfig::from_json(j.at("provider"));
    provider_set = true;
  }
  if (j.contains("cassette")) {
    const auto& c = j.at("cassette");
    if (c.is_null()) {
      use_cassette = false;
    } else {
      if (c.contains("path")) cassette_path = fs::path(c.at("path").get<std::string>());
      std::string mode = c.value("mode", "replay");
      if (mode == "record")
        cassette_mode = CassetteMode::record;
      else if (mode == "replay")
        cassette_mode = CassetteMode::replay;
      else
        throw config_error("cassette mode must be record or replay, got \"" + mode + "\"");
    }
  }
  if (j.contains("gateway")) {
    const auto& g = j.at("gateway");
    gateway.max_retries = g.value("max_retries", gateway.max_retries);
    gateway.backoff_base_ms = g.value("backoff_base_ms", gateway.backoff_base_ms);
    gateway.rate_limit_per_minute = g.value("rate_limit_per_minute", gateway.rate_limit_per_minute);
    gateway.decoding_seed = g.value("decoding_seed", gateway.decoding_seed);
    gateway.image_max_long_edge = g.value("image_max_long_edge", gateway.image_max_long_edge);
  }
  if (j.contains("detector")) detector = DetectorConfig::from_json_text(j.at("detector").dump());
  if (j.contains("templates_dir")) templates_dir = j.at("templates_dir").get<std::string>();
  if (j.contains("line_overlap_ratio")) line_overlap_ratio = j.at("line_overlap_ratio").get<double>();
}

RunConfig run_config_from_json_text(std::string_view text) {
  json j = parse_json(text, "run config");
  RunConfig config;
  if (j.contains("method")) {
    auto method = method_from_name(j.at("method").get<std::string>());
    if (!method) throw config_error("run config: unknown method");
    config.method = *method;
  }
  if (j.contains("modality")) {
    auto modality = modality_from_name(j.at("modality").get<std::string>());
    if (!modality) throw config_error("run config: unknown modality");
    config.modality = *modality;
  }
  if (j.contains("schema")) config.schema_path = j.at("schema").get<std::string>();
  if (j.contains("corpus")) config.corpus_dir = j.at("corpus").get<std::string>();
  if (j.contains("output")) config.output_dir = j.at("output").get<std::string>();
  config.workers = j.value("workers", config.workers);
  config.seed = j.value("seed", config.seed);
  config.quiet = j.value("quiet", config.quiet);
  config.apply_config_json(j);
  if (config.schema_path.empty()) throw usage_error("run config: schema path required");
  if (config.corpus_dir.empty()) throw usage_error("run config: corpus directory required");
  if (config.output_dir.empty()) throw usage_error("run config: output directory required");
  return config;
}

ExtractionResult run_report(const OcrDocument& doc,
                            const std::optional<std::vector<std::uint8_t>>& image,
                            const PipelineContext& ctx) {
  ExtractionResult empty;
  empty.report_id = doc.report_id;
  empty.schema_version = ctx.schema.version;

  std::vector<std::string> warnings;
  std::optional<std::vector<std::uint8_t>> page_image;
  if (ctx.modality.send_image) {
    if (!image || image->empty())
      throw usage_error("report " + doc.report_id + ": image modality requested but no image found");
    page_image = *image;
  }

  // Text-side preprocessing: reconstruct, pre-correct, desensitize. Image-only
  // runs skip all of it (there is no text to operate on).
  std::string masked_text;
  MappingTable table;
  table.report_id = doc.report_id;
  if (ctx.modality.send_text) {
    std::string raw_text = reconstruct_text(doc, ctx.line_overlap_ratio);
    if (raw_text.empty()) {
      empty.warnings.push_back("empty OCR document, nothing to extract");
      return empty;
    }
    std::string corrected = parse_precorrection_response(
        ctx.gateway.complete(build_precorrection_prompt(ctx.templates, raw_text), page_image,
                             ctx.modality));
    auto spans = ctx.detector.detect(corrected);
    auto masked = mask(corrected, spans, doc.report_id);
    masked_text = std::move(masked.masked_text);
    table = std::move(masked.table);
  }

  std::vector<std::string> scenario_ids;
  if (ctx.method == Method::chatschema) {
    std::string response = ctx.gateway.complete(
        build_classification_prompt(ctx.templates, ctx.schema, masked_text), page_image, ctx.modality);
    scenario_ids = parse_classification_response(response, ctx.schema, &warnings);
    if (scenario_ids.empty()) {
      empty.warnings = std::move(warnings);
      empty.warnings.push_back("no scenarios classified, returning empty extraction");
      return empty;
    }
  }

  std::string prompt =
      ctx.method == Method::chatschema
          ? build_extraction_prompt(ctx.templates, ctx.schema, scenario_ids, masked_text)
          : build_baseline_prompt(ctx.templates, ctx.schema, masked_text);
  std::string response = ctx.gateway.complete(prompt, page_image, ctx.modality);
  RawExtraction raw = parse_extraction_response(response, &warnings);

  ExtractionResult result = normalize_extraction(raw, ctx.schema, doc.report_id);
  result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
  return restore_result(std::move(result), table);
}

std::optional<json> load_corpus_manifest(const fs::path& corpus_dir) {
  fs::path manifest = corpus_dir / "manifest.json";
  if (!fs::exists(manifest)) return std::nullopt;
  return parse_json(read_file(manifest), "corpus manifest");
}

RunOutcome run_corpus(const RunConfig& config) {
  RunOutcome outcome;
  Schema schema = load_schema_file(config.schema_path.string());
  TemplateSet templates =
      config.templates_dir ? TemplateSet::load_dir(*config.templates_dir) : TemplateSet::defaults();
  auto detector = make_rule_based_detector(config.detector);

  ProviderConfig provider = config.provider;
  if (!config.provider_set) {
    auto manifest = load_corpus_manifest(config.corpus_dir);
    if (manifest && manifest->contains("provider"))
      provider = ProviderConfig::from_json(manifest->at("provider"));
    else
      throw config_error("no provider configured and corpus manifest has none");
  }

  std::shared_ptr<Cassette> cassette;
  if (config.use_cassette) {
    fs::path path = config.cassette_path
                        ? *config.cassette_path
                        : config.corpus_dir / "cassettes" / (config.cell_name() + ".jsonl");
    if (config.cassette_mode == CassetteMode::replay && !fs::exists(path))
      outcome.warnings.push_back("cassette " + path.string() +
                                 " not found; every request will miss");
    cassette = std::make_shared<Cassette>(path, config.cassette_mode);
  }
  Gateway gateway(provider, config.gateway, cassette);

  std::vector<fs::path> report_files;
  fs::path reports_dir = config.corpus_dir / "reports";
  if (!fs::exists(reports_dir)) throw usage_error("corpus has no reports/ directory: " +
                                                  reports_dir.string());
  for (const auto& entry : fs::directory_iterator(reports_dir)) {
    if (entry.path().extension() == ".json") report_files.push_back(entry.path());
  }
  std::sort(report_files.begin(), report_files.end());

  PipelineContext ctx{schema,        templates,       *detector,
                      gateway,       config.method,   config.modality,
                      config.line_overlap_ratio};

  struct Slot {
    ExtractionResult result;
    std::string error;
    ErrorKind kind = ErrorKind::internal;
    bool failed = false;
  };
  std::vector<Slot> slots(report_files.size());

  parallel_for(report_files.size(), config.workers, [&](size_t i) {
    Slot& slot = slots[i];
    std::string report_id = report_files[i].stem().string();
    if (report_id.size() > 4 && report_id.ends_with(".ocr"))
      report_id = report_id.substr(0, report_id.size() - 4);
    try {
      OcrDocument doc = parse_ocr_document_file(report_files[i].string());
      auto image = load_report_image(config.corpus_dir, doc);
      slot.result = run_report(doc, image, ctx);
    } catch (const Error& e) {
      slot.failed = true;
      slot.error = e.what();
      slot.kind = e.kind();
      slot.result = ExtractionResult{};
      slot.result.report_id = report_id;
      slot.result.schema_version = schema.version;
      slot.result.failed = true;
      slot.result.warnings.push_back(std::string("report failed: ") + e.what());
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
      slot.result = ExtractionResult{};
      slot.result.report_id = report_id;
      slot.result.schema_version = schema.version;
      slot.result.failed = true;
      slot.result.warnings.push_back(std::string("report failed: ") + e.what());
    }
  });

  fs::path pred_dir = config.output_dir / "pred";
  fs::create_directories(pred_dir);
  for (const auto& slot : slots)
    write_file_atomic(pred_dir / (slot.result.report_id + ".json"),
                      serialize_extraction_result(slot.result));

  outcome.reports = static_cast<int>(slots.size());
  for (const auto& slot : slots) {
    if (!slot.failed) continue;
    ++outcome.failed;
    if (outcome.first_failure.empty()) {
      outcome.first_failure = slot.error;
      outcome.first_failure_kind = slot.kind;
    }
  }

  json summary = json::object();
  summary["method"] = method_name(config.method);
  summary["modality"] = modality_name(config.modality);
  summary["schema_version"] = schema.version;
  summary["reports"] = outcome.reports;
  summary["failed"] = outcome.failed;
  json rows = json::array();
  struct Row {
    std::string id;
    size_t pairs;
    size_t warnings;
    bool failed;
  };
  std::vector<Row> sorted_rows;
  for (const auto& slot : slots)
    sorted_rows.push_back(
        {slot.result.report_id, slot.result.pairs.size(), slot.result.warnings.size(), slot.result.failed});
  std::sort(sorted_rows.begin(), sorted_rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
  for (const auto& r : sorted_rows)
    rows.push_back({{"report_id", r.id}, {"pairs", r.pairs}, {"warnings", r.warnings}, {"failed", r.failed}});
  summary["results"] = rows;
  summary["warnings"] = outcome.warnings;

  if (fs::exists(config.corpus_dir / "gold")) {
    EvalOutcome eval = evaluate_dirs(config.corpus_dir / "gold", pred_dir);
    outcome.metrics = eval.metrics;
    summary["metrics"] = parse_json(metrics_to_json_text(eval.metrics), "metrics");
    write_file_atomic(config.output_dir / "metrics.json", metrics_to_json_text(eval.metrics));
    write_file_atomic(config.output_dir / "metrics.csv", metrics_csv_row(eval.metrics) + "\n");
  }

  outcome.summary = summary;
  write_file_atomic(config.output_dir / "summary.json", summary.dump(2) + "\n");
  return outcome;
}

EvalOutcome evaluate_dirs(const fs::path& gold_dir, const fs::path& pred_dir) {
  EvalOutcome outcome;
  if (!fs::exists(gold_dir)) throw usage_error("gold directory not found: " + gold_dir.string());
  if (!fs::exists(pred_dir)) throw usage_error("prediction directory not found: " + pred_dir.string());

  std::vector<fs::path> gold_files;
  for (const auto& entry : fs::directory_iterator(gold_dir))
    if (entry.path().extension() == ".json") gold_files.push_back(entry.path());
  std::sort(gold_files.begin(), gold_files.end());
  if (gold_files.empty()) throw usage_error("no gold annotations under " + gold_dir.string());

  std::vector<ConfusionBreakdown> breakdowns;
  for (const auto& gold_file : gold_files) {
    ExtractionResult gold = parse_extraction_result_file(gold_file.string());
    fs::path pred_file = pred_dir / gold_file.filename();
    ExtractionResult predicted;
    if (fs::exists(pred_file)) {
      predicted = parse_extraction_result_file(pred_file.string());
    } else {
      outcome.warnings.push_back("no prediction for " + gold.report_id + "; scoring all keys missed");
      predicted.report_id = gold.report_id;
      predicted.schema_version = gold.schema_version;
    }
    breakdowns.push_back(match_pairs(gold, predicted));
    ++outcome.reports;

    ConfusionBreakdown& b = breakdowns.back();
    auto& all = outcome.combined;
    all.corrects.insert(all.corrects.end(), b.corrects.begin(), b.corrects.end());
    all.value_mismatches.insert(all.value_mismatches.end(), b.value_mismatches.begin(),
                                b.value_mismatches.end());
    all.key_fp.insert(all.key_fp.end(), b.key_fp.begin(), b.key_fp.end());
    all.key_fn.insert(all.key_fn.end(), b.key_fn.begin(), b.key_fn.end());
  }
  outcome.metrics = aggregate(breakdowns);
  return outcome;
}

std::vector<AblationCell> default_grid() {
  std::vector<AblationCell> grid;
  for (Method method : {Method::chatschema, Method::baseline})
    for (const char* modality : {"image", "text", "both"})
      grid.push_back({method, *modality_from_name(modality)});
  return grid;
}

std::vector<AblationCell> grid_from_json_text(std::string_view text) {
  json j = parse_json(text, "ablation grid");
  std::vector<AblationCell> grid;
  auto parse_cell = [](const json& cj) {
    auto method = method_from_name(cj.value("method", ""));
    auto modality = modality_from_name(cj.value("modality", ""));
    if (!method) throw config_error("grid cell: unknown method \"" + cj.value("method", "") + "\"");
    if (!modality)
      throw config_error("grid cell: unknown modality \"" + cj.value("modality", "") + "\"");
    return AblationCell{*method, *modality};
  };
  if (j.contains("cells")) {
    for (const auto& cj : j.at("cells")) grid.push_back(parse_cell(cj));
  } else {
    std::vector<Method> methods;
    std::vector<ModalityConfig> modalities;
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) {
        auto method = method_from_name(m.get<std::string>());
        if (!method) throw config_error("grid: unknown method \"" + m.get<std::string>() + "\"");
        methods.push_back(*method);
      }
    } else {
      methods = {Method::chatschema, Method::baseline};
    }
    if (j.contains("modalities")) {
      for (const auto& m : j.at("modalities")) {
        auto modality = modality_from_name(m.get<std::string>());
        if (!modality) throw config_error("grid: unknown modality \"" + m.get<std::string>() + "\"");
        modalities.push_back(*modality);
      }
    } else {
      modalities = {*modality_from_name("image"), *modality_from_name("text"),
                    *modality_from_name("both")};
    }
    for (Method method : methods)
      for (ModalityConfig modality : modalities) grid.push_back({method, modality});
  }
  if (grid.empty()) throw config_error("ablation grid is empty");
  return grid;
}

namespace {

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

}  // namespace

json run_ablation(const RunConfig& base, const std::vector<AblationCell>& grid) {
  json cells = json::array();
  std::string csv = "Method,Text,Image,Key-P,Key-R,Key-F1,Acc,P,R,F1\n";

  for (const auto& cell : grid) {
    RunConfig config = base;
    config.method = cell.method;
    config.modality = cell.modality;
    config.cassette_path.reset();  // per-cell cassette under the corpus
    config.output_dir = base.output_dir / "results" / config.cell_name();

    json cj = json::object();
    cj["method"] = method_name(cell.method);
    cj["modality"] = modality_name(cell.modality);
    try {
      RunOutcome outcome = run_corpus(config);
      cj["reports"] = outcome.reports;
      cj["failed"] = outcome.failed;
      if (outcome.metrics) {
        cj["metrics"] = parse_json(metrics_to_json_text(*outcome.metrics), "metrics");
        const MetricsReport& m = *outcome.metrics;
        csv += std::string(method_name(cell.method)) + "," +
               (cell.modality.send_text ? "✓" : "✗") + "," +
               (cell.modality.send_image ? "✓" : "✗") + "," + format_percent(m.key_precision) +
               "," + format_percent(m.key_recall) + "," + format_percent(m.key_f1) + "," +
               format_percent(m.accuracy) + "," + format_percent(m.precision) + "," +
               format_percent(m.recall) + "," + format_percent(m.f1) + "\n";
      } else {
        cj["metrics"] = nullptr;
      }
    } catch (const std::exception& e) {
      cj["error"] = e.what();
    }
    cells.push_back(std::move(cj));
  }

  json out = json::object();
  out["cells"] = cells;
  fs::create_directories(base.output_dir / "results");
  write_file_atomic(base.output_dir / "results" / "table.csv", csv);
  write_file_atomic(base.output_dir / "results" / "ablation.json", out.dump(2) + "\n");
  return out;
}

}  // namespace medrex
