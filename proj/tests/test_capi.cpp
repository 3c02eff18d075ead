// Exercises the shared-library surface the way an external consumer would:
// through medrex.h only.

#include "medrex/medrex.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string take(char* s) {
  std::string out = s ? s : "";
  mrex_string_free(s);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "medrex_capi_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(CApi, VersionAndErrorStrings) {
  EXPECT_STRNE(mrex_version(), "");
  mrex_schema* schema = nullptr;
  EXPECT_EQ(mrex_schema_load_file("/nonexistent/schema.json", &schema), MREX_ERR_IO);
  EXPECT_NE(std::string(mrex_last_error()).find("/nonexistent/schema.json"), std::string::npos);
}

TEST(CApi, NullArgumentsAreUsageErrors) {
  EXPECT_EQ(mrex_schema_load_file(nullptr, nullptr), MREX_ERR_USAGE);
  EXPECT_EQ(mrex_restore_text(nullptr, nullptr, nullptr), MREX_ERR_USAGE);
}

TEST(CApi, SchemaLoadStatsSerialize) {
  mrex_schema* schema = nullptr;
  ASSERT_EQ(mrex_schema_load_file(MEDREX_FIXTURE_SCHEMA, &schema), MREX_OK);
  int version = 0, scenarios = 0, details = 0, generals = 0;
  ASSERT_EQ(mrex_schema_stats(schema, &version, &scenarios, &details, &generals), MREX_OK);
  EXPECT_EQ(version, 1);
  EXPECT_EQ(scenarios, 13);
  EXPECT_EQ(details, 137);
  EXPECT_EQ(generals, 18);

  char* serialized = nullptr;
  ASSERT_EQ(mrex_schema_serialize(schema, &serialized), MREX_OK);
  std::string text = take(serialized);
  EXPECT_NE(text.find("\"scenarios\""), std::string::npos);

  mrex_schema* reloaded = nullptr;
  ASSERT_EQ(mrex_schema_load_text(text.c_str(), &reloaded), MREX_OK);
  mrex_schema_free(reloaded);
  mrex_schema_free(schema);
}

TEST(CApi, ValidateFileReportsViolations) {
  fs::path dir = fresh_dir("validate");
  fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"version": 1, "scenarios": [{"id": "x", "name": "X", "cues": ["c"],
    "fields": [{"key": "Result", "value_type": "dictionary"}]}], "general_fields": []})";
  char* violations = nullptr;
  ASSERT_EQ(mrex_schema_validate_file(bad.string().c_str(), &violations), MREX_OK);
  std::string text = take(violations);
  EXPECT_NE(text.find("options-missing"), std::string::npos);

  char* clean = nullptr;
  ASSERT_EQ(mrex_schema_validate_file(MEDREX_FIXTURE_SCHEMA, &clean), MREX_OK);
  EXPECT_EQ(take(clean), "[]\n");
}

TEST(CApi, AddScenarioBumpsVersion) {
  mrex_schema* schema = nullptr;
  ASSERT_EQ(mrex_schema_load_text(R"({"version": 1, "scenarios": [], "general_fields": []})",
                                  &schema),
            MREX_OK);
  const char* scenario = R"json({"id": "iron5", "name": "Five Iron Profile",
    "cues": ["Total Iron Binding Capacity (TIBC)", "Serum Ferritin (SF)"], "fields": []})json";
  mrex_schema* updated = nullptr;
  ASSERT_EQ(mrex_schema_add_scenario(schema, scenario, &updated), MREX_OK);
  int version = 0;
  mrex_schema_stats(updated, &version, nullptr, nullptr, nullptr);
  EXPECT_EQ(version, 2);

  mrex_schema* dup = nullptr;
  EXPECT_EQ(mrex_schema_add_scenario(updated, scenario, &dup), MREX_ERR_VALIDATION);
  mrex_schema_free(updated);
  mrex_schema_free(schema);
}

TEST(CApi, ResolveField) {
  mrex_schema* schema = nullptr;
  ASSERT_EQ(mrex_schema_load_file(MEDREX_FIXTURE_SCHEMA, &schema), MREX_OK);
  char* field = nullptr;
  ASSERT_EQ(mrex_schema_resolve_field(schema, "esr_crp", "Sed rate", &field), MREX_OK);
  std::string text = take(field);
  EXPECT_NE(text.find("Erythrocyte Sedimentation Rate (ESR)"), std::string::npos);

  char* missing = reinterpret_cast<char*>(1);
  ASSERT_EQ(mrex_schema_resolve_field(schema, nullptr, "XYZ", &missing), MREX_OK);
  EXPECT_EQ(missing, nullptr);

  char* ambiguous = nullptr;
  EXPECT_EQ(mrex_schema_resolve_field(schema, nullptr, "WBC", &ambiguous), MREX_ERR_VALIDATION);
  mrex_schema_free(schema);
}

TEST(CApi, OcrReconstructAndHocr) {
  const char* ocr = R"({"report_id": "r", "page": {"width": 500, "height": 100},
    "segments": [
      {"text": "6.2", "bbox": [70, 10, 110, 30], "confidence": 0.9},
      {"text": "WBC", "bbox": [10, 10, 60, 30], "confidence": 0.9}
    ]})";
  char* text = nullptr;
  ASSERT_EQ(mrex_ocr_reconstruct_text(ocr, 0.5, &text), MREX_OK);
  EXPECT_EQ(take(text), "WBC 6.2");

  const char* hocr = R"(<span class='ocrx_word' title='bbox 10 10 60 30; x_wconf 95'>HGB</span>)";
  char* converted = nullptr;
  ASSERT_EQ(mrex_hocr_to_ocr_json(hocr, "h", &converted), MREX_OK);
  char* reconstructed = nullptr;
  std::string converted_text = take(converted);
  ASSERT_EQ(mrex_ocr_reconstruct_text(converted_text.c_str(), 0.5, &reconstructed), MREX_OK);
  EXPECT_EQ(take(reconstructed), "HGB");
}

TEST(CApi, MaskRestoreRoundTrip) {
  char* masked = nullptr;
  char* table = nullptr;
  ASSERT_EQ(mrex_mask_text("患者 张三 病案号 00123456", nullptr, "r1", &masked, &table), MREX_OK);
  std::string masked_text = take(masked);
  std::string table_json = take(table);
  EXPECT_EQ(masked_text.find("张三"), std::string::npos);
  EXPECT_EQ(masked_text.find("00123456"), std::string::npos);

  char* restored = nullptr;
  ASSERT_EQ(mrex_restore_text(masked_text.c_str(), table_json.c_str(), &restored), MREX_OK);
  EXPECT_EQ(take(restored), "患者 张三 病案号 00123456");
}

TEST(CApi, GenerateRunEvaluate) {
  fs::path corpus = fresh_dir("capi_corpus");
  fs::path out = fresh_dir("capi_out");
  const char* spec = R"({"report_count": 3, "scenarios_per_report": [1, 1],
    "fields_per_scenario": [4, 4], "general_fields_per_report": [2, 2],
    "value_error_rate": 0.0, "key_drop_rate": 0.0, "key_extra_rate": 0.0,
    "ocr_char_confusion_rate": 0.1, "seed": 77})";
  char* manifest = nullptr;
  ASSERT_EQ(mrex_generate_corpus(spec, MEDREX_FIXTURE_SCHEMA, corpus.string().c_str(), &manifest),
            MREX_OK)
      << mrex_last_error();
  EXPECT_NE(take(manifest).find("\"gold_pairs\": 18"), std::string::npos);

  std::ostringstream config;
  config << R"({"method": "chatschema", "modality": "both", "schema": ")" << MEDREX_FIXTURE_SCHEMA
         << R"(", "corpus": ")" << corpus.string() << R"(", "output": ")" << out.string()
         << R"(", "workers": 2})";
  char* summary = nullptr;
  ASSERT_EQ(mrex_run_corpus(config.str().c_str(), &summary), MREX_OK) << mrex_last_error();
  EXPECT_NE(take(summary).find("\"failed\": 0"), std::string::npos);

  char* metrics = nullptr;
  char* csv = nullptr;
  char* errors = nullptr;
  ASSERT_EQ(mrex_evaluate_dirs((corpus / "gold").string().c_str(),
                               (out / "pred").string().c_str(), &metrics, &csv, &errors),
            MREX_OK);
  EXPECT_EQ(take(csv), "100.0,100.0,100.0,100.0,100.0,100.0,100.0");
  EXPECT_NE(take(metrics).find("\"accuracy\": 1.0"), std::string::npos);
  EXPECT_NE(take(errors).find("\"cases\": []"), std::string::npos);
}

TEST(CApi, ReplayMissSurfacesFingerprint) {
  fs::path corpus = fresh_dir("capi_miss_corpus");
  fs::path out = fresh_dir("capi_miss_out");
  const char* spec = R"({"report_count": 2, "seed": 3})";
  char* manifest = nullptr;
  ASSERT_EQ(mrex_generate_corpus(spec, MEDREX_FIXTURE_SCHEMA, corpus.string().c_str(), &manifest),
            MREX_OK);
  mrex_string_free(manifest);
  fs::remove_all(corpus / "cassettes");  // replay has nothing to answer from

  std::ostringstream config;
  config << R"({"method": "chatschema", "modality": "both", "schema": ")" << MEDREX_FIXTURE_SCHEMA
         << R"(", "corpus": ")" << corpus.string() << R"(", "output": ")" << out.string() << R"("})";
  char* summary = nullptr;
  EXPECT_EQ(mrex_run_corpus(config.str().c_str(), &summary), MREX_ERR_CASSETTE_MISS);
  EXPECT_NE(std::string(mrex_last_error()).find("fingerprint"), std::string::npos);
}

}  // namespace
