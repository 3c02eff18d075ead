// Command-line front end over the medrex C API.
//
// Exit codes: 0 success, 1 domain error (parse/validation), 2 usage error,
// 3 transport/provider error. Progress and warnings go to stderr; results go
// to files under --output or to stdout.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "medrex/medrex.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct GlobalOptions {
  std::string schema_path;
  std::string config_path;
  std::string output_dir = "medrex-out";
  int workers = 4;
  unsigned long long seed = 0;
  bool quiet = false;
};

int exit_code_for(mrex_status status) {
  switch (status) {
    case MREX_OK: return 0;
    case MREX_ERR_USAGE:
    case MREX_ERR_CONFIG: return 2;
    case MREX_ERR_TRANSPORT:
    case MREX_ERR_CASSETTE_MISS: return 3;
    default: return 1;
  }
}

int fail(mrex_status status) {
  std::cerr << "error: " << mrex_last_error() << "\n";
  return exit_code_for(status);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  mrex_string_free(s);
  return out;
}

std::string read_file_or_die(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    std::exit(1);
  }
}

void note(const GlobalOptions& global, const std::string& message) {
  if (!global.quiet) std::cerr << message << "\n";
}

json load_config_json(const GlobalOptions& global) {
  if (global.config_path.empty()) return json::object();
  return json::parse(read_file_or_die(global.config_path));
}

json run_config_json(const GlobalOptions& global, const std::string& method,
                     const std::string& modality, const std::string& corpus) {
  json config = load_config_json(global);
  config["method"] = method;
  config["modality"] = modality;
  config["schema"] = global.schema_path;
  config["corpus"] = corpus;
  config["output"] = global.output_dir;
  config["workers"] = global.workers;
  config["seed"] = global.seed;
  config["quiet"] = global.quiet;
  return config;
}

// ---- schema add-scenario dialog ----

std::string ask(const std::string& prompt) {
  std::cerr << prompt;
  std::cerr.flush();
  std::string line;
  if (!std::getline(std::cin, line)) return "";
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t b = item.find_first_not_of(" \t");
    size_t e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

json scenario_dialog() {
  json scenario = json::object();
  scenario["id"] = ask("scenario id: ");
  scenario["name"] = ask("display name: ");
  scenario["cues"] = split_csv(ask("cues (comma separated): "));

  json directives = json::array();
  std::cerr << "few-shot directives (empty condition to finish)\n";
  for (;;) {
    std::string condition = ask("  condition: ");
    if (condition.empty()) break;
    std::string conclusion = ask("  conclusion: ");
    directives.push_back({{"condition", condition}, {"conclusion", conclusion}});
  }
  scenario["few_shot_directives"] = directives;

  json fields = json::array();
  std::cerr << "fields (empty key to finish)\n";
  for (;;) {
    std::string key = ask("  field key: ");
    if (key.empty()) break;
    json field = json::object();
    field["key"] = key;
    field["aliases"] = split_csv(ask("    aliases (comma separated): "));
    std::string type = ask("    value type [datetime|integer|string|float|dictionary]: ");
    field["value_type"] = type.empty() ? "string" : type;
    std::string unit = ask("    canonical unit (empty for none): ");
    field["canonical_unit"] = unit.empty() ? json(nullptr) : json(unit);
    json conversions = json::object();
    for (const auto& part : split_csv(ask("    unit conversions as unit=factor (comma separated): "))) {
      auto eq = part.find('=');
      if (eq == std::string::npos) continue;
      conversions[part.substr(0, eq)] = std::stod(part.substr(eq + 1));
    }
    field["unit_conversions"] = conversions;
    if (field["value_type"] == "dictionary") {
      json options = json::object();
      for (const auto& part : split_csv(ask("    options as raw=canonical (comma separated): "))) {
        auto eq = part.find('=');
        if (eq == std::string::npos) continue;
        options[part.substr(0, eq)] = part.substr(eq + 1);
      }
      field["options"] = options;
    } else {
      field["options"] = nullptr;
    }
    field["description"] = ask("    description: ");
    fields.push_back(std::move(field));
  }
  scenario["fields"] = fields;
  return scenario;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"medrex: schema-guided key-value extraction from OCR'd medical reports"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--schema", global.schema_path, "Schema JSON file");
  app.add_option("--config", global.config_path, "Run configuration JSON file");
  app.add_option("--output", global.output_dir, "Directory for every output file");
  app.add_option("--workers", global.workers, "Worker pool size");
  app.add_option("--seed", global.seed, "Seed for corpus generation");
  app.add_flag("--quiet", global.quiet, "Suppress progress output on stderr");

  // schema validate | add-scenario
  auto* schema_cmd = app.add_subcommand("schema", "Schema tools");
  schema_cmd->require_subcommand(1);
  auto* schema_validate = schema_cmd->add_subcommand("validate", "Validate a schema file");
  auto* schema_add = schema_cmd->add_subcommand(
      "add-scenario", "Interactively define a scenario and write the bumped schema");

  // ocr reconstruct | import-hocr
  auto* ocr_cmd = app.add_subcommand("ocr", "OCR document tools");
  ocr_cmd->require_subcommand(1);
  std::string ocr_file;
  double overlap = 0.5;
  auto* ocr_rec = ocr_cmd->add_subcommand("reconstruct", "Reading-order text from an OCR document");
  ocr_rec->add_option("file", ocr_file, "OCR document JSON")->required();
  ocr_rec->add_option("--overlap", overlap, "Line overlap ratio (0,1]");
  std::string hocr_file, hocr_report_id = "report";
  auto* ocr_hocr = ocr_cmd->add_subcommand("import-hocr", "Convert hOCR HTML to OCR document JSON");
  ocr_hocr->add_option("file", hocr_file, "hOCR file")->required();
  ocr_hocr->add_option("--report-id", hocr_report_id, "Report id for the converted document");

  // mask | unmask
  std::string mask_file, mask_detector, mask_report_id = "report";
  auto* mask_cmd = app.add_subcommand("mask", "Mask sensitive entities in a text file");
  mask_cmd->add_option("file", mask_file, "Input text file")->required();
  mask_cmd->add_option("--detector", mask_detector, "Detector config JSON file");
  mask_cmd->add_option("--report-id", mask_report_id, "Report id recorded in the mapping table");
  std::string unmask_file, unmask_table;
  auto* unmask_cmd = app.add_subcommand("unmask", "Restore placeholders from a mapping table");
  unmask_cmd->add_option("file", unmask_file, "Masked text file")->required();
  unmask_cmd->add_option("--table", unmask_table, "Mapping table JSON file")->required();

  // run
  std::string run_method = "chatschema", run_modality = "both", run_corpus_dir;
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline over a corpus");
  run_cmd->add_option("--method", run_method, "chatschema|baseline")
      ->check(CLI::IsMember({"chatschema", "baseline"}));
  run_cmd->add_option("--modality", run_modality, "text|image|both")
      ->check(CLI::IsMember({"text", "image", "both"}));
  run_cmd->add_option("--corpus", run_corpus_dir, "Corpus directory")->required();

  // eval
  std::string eval_gold, eval_pred;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold annotations");
  eval_cmd->add_option("--gold", eval_gold, "Gold directory")->required();
  eval_cmd->add_option("--pred", eval_pred, "Prediction directory")->required();

  // ablate
  std::string ablate_grid, ablate_corpus;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the method x modality grid");
  ablate_cmd->add_option("--grid", ablate_grid, "Grid spec JSON file (default: all six cells)");
  ablate_cmd->add_option("--corpus", ablate_corpus, "Corpus directory")->required();

  // gen-corpus
  std::string gen_spec;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic corpus with cassettes");
  gen_cmd->add_option("--spec", gen_spec, "Corpus spec JSON file")->required();

  // Let global flags like --schema appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->fallthrough();
    for (CLI::App* nested : sub->get_subcommands({})) nested->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  if (*schema_validate) {
    char* violations_text = nullptr;
    mrex_status status = mrex_schema_validate_file(global.schema_path.c_str(), &violations_text);
    if (status != MREX_OK) return fail(status);
    json violations = json::parse(take(violations_text));
    if (violations.empty()) {
      mrex_schema* schema = nullptr;
      status = mrex_schema_load_file(global.schema_path.c_str(), &schema);
      if (status != MREX_OK) return fail(status);
      int version = 0, scenarios = 0, details = 0, generals = 0;
      mrex_schema_stats(schema, &version, &scenarios, &details, &generals);
      mrex_schema_free(schema);
      std::cout << "ok: version " << version << ", " << scenarios << " scenarios, " << details
                << " detail fields, " << generals << " general fields\n";
      return 0;
    }
    for (const auto& v : violations)
      std::cout << v.value("path", "") << " [" << v.value("rule", "") << "]: "
                << v.value("message", "") << "\n";
    return 1;
  }

  if (*schema_add) {
    mrex_schema* schema = nullptr;
    mrex_status status = mrex_schema_load_file(global.schema_path.c_str(), &schema);
    if (status != MREX_OK) return fail(status);
    json scenario = scenario_dialog();
    mrex_schema* updated = nullptr;
    status = mrex_schema_add_scenario(schema, scenario.dump().c_str(), &updated);
    mrex_schema_free(schema);
    if (status != MREX_OK) return fail(status);
    int version = 0;
    mrex_schema_stats(updated, &version, nullptr, nullptr, nullptr);
    char* serialized = nullptr;
    status = mrex_schema_serialize(updated, &serialized);
    mrex_schema_free(updated);
    if (status != MREX_OK) return fail(status);
    fs::path out = fs::path(global.output_dir) / ("schema.v" + std::to_string(version) + ".json");
    write_file(out, take(serialized));
    std::cout << out.string() << "\n";
    return 0;
  }

  if (*ocr_rec) {
    char* text = nullptr;
    mrex_status status = mrex_ocr_reconstruct_file(ocr_file.c_str(), overlap, &text);
    if (status != MREX_OK) return fail(status);
    std::cout << take(text) << "\n";
    return 0;
  }

  if (*ocr_hocr) {
    std::string hocr = read_file_or_die(hocr_file);
    char* converted = nullptr;
    mrex_status status = mrex_hocr_to_ocr_json(hocr.c_str(), hocr_report_id.c_str(), &converted);
    if (status != MREX_OK) return fail(status);
    std::cout << take(converted);
    return 0;
  }

  if (*mask_cmd) {
    std::string text = read_file_or_die(mask_file);
    std::string detector_json;
    if (!mask_detector.empty()) detector_json = read_file_or_die(mask_detector);
    char* masked = nullptr;
    char* table = nullptr;
    mrex_status status = mrex_mask_text(text.c_str(),
                                        detector_json.empty() ? nullptr : detector_json.c_str(),
                                        mask_report_id.c_str(), &masked, &table);
    if (status != MREX_OK) return fail(status);
    fs::path table_path =
        fs::path(global.output_dir) / (fs::path(mask_file).stem().string() + ".mapping.json");
    write_file(table_path, take(table));
    note(global, "mapping table written to " + table_path.string());
    std::cout << take(masked);
    return 0;
  }

  if (*unmask_cmd) {
    std::string text = read_file_or_die(unmask_file);
    std::string table = read_file_or_die(unmask_table);
    char* restored = nullptr;
    mrex_status status = mrex_restore_text(text.c_str(), table.c_str(), &restored);
    if (status != MREX_OK) return fail(status);
    std::cout << take(restored);
    return 0;
  }

  if (*run_cmd) {
    if (global.schema_path.empty()) {
      std::cerr << "error: --schema is required for run\n";
      return 2;
    }
    json config = run_config_json(global, run_method, run_modality, run_corpus_dir);
    note(global, "running " + run_method + " / " + run_modality + " over " + run_corpus_dir);
    char* summary = nullptr;
    mrex_status status = mrex_run_corpus(config.dump().c_str(), &summary);
    if (status != MREX_OK) return fail(status);
    std::cout << take(summary);
    return 0;
  }

  if (*eval_cmd) {
    char* metrics = nullptr;
    char* csv = nullptr;
    char* errors = nullptr;
    mrex_status status =
        mrex_evaluate_dirs(eval_gold.c_str(), eval_pred.c_str(), &metrics, &csv, &errors);
    if (status != MREX_OK) return fail(status);
    std::string metrics_text = take(metrics);
    std::string csv_row = take(csv);
    std::string errors_text = take(errors);
    write_file(fs::path(global.output_dir) / "metrics.json", metrics_text);
    write_file(fs::path(global.output_dir) / "metrics.csv", csv_row + "\n");
    write_file(fs::path(global.output_dir) / "error_report.json", errors_text);
    std::cout << "Key-P,Key-R,Key-F1,Acc,P,R,F1\n" << csv_row << "\n";
    note(global, "metrics and error report written under " + global.output_dir);
    return 0;
  }

  if (*ablate_cmd) {
    if (global.schema_path.empty()) {
      std::cerr << "error: --schema is required for ablate\n";
      return 2;
    }
    json config = run_config_json(global, "chatschema", "both", ablate_corpus);
    std::string grid_json;
    if (!ablate_grid.empty()) grid_json = read_file_or_die(ablate_grid);
    char* table = nullptr;
    mrex_status status = mrex_run_ablation(config.dump().c_str(),
                                           grid_json.empty() ? nullptr : grid_json.c_str(), &table);
    if (status != MREX_OK) return fail(status);
    std::cout << take(table);
    return 0;
  }

  if (*gen_cmd) {
    if (global.schema_path.empty()) {
      std::cerr << "error: --schema is required for gen-corpus\n";
      return 2;
    }
    json spec = json::parse(read_file_or_die(gen_spec));
    if (global.seed != 0) spec["seed"] = global.seed;
    char* manifest = nullptr;
    mrex_status status = mrex_generate_corpus(spec.dump().c_str(), global.schema_path.c_str(),
                                              global.output_dir.c_str(), &manifest);
    if (status != MREX_OK) return fail(status);
    json m = json::parse(take(manifest));
    note(global, "corpus written to " + global.output_dir);
    std::cout << "reports: " << m.value("report_count", 0)
              << ", gold pairs: " << m.value("gold_pairs", 0) << "\n";
    return 0;
  }

  return 2;
}
