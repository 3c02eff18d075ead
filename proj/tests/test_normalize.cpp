#include "normalize/normalize.hpp"

#include <gtest/gtest.h>

#include <random>

#include "common/errors.hpp"

namespace medrex {
namespace {

Schema fixture() { return load_schema_file(MEDREX_FIXTURE_SCHEMA); }

FieldSpec cm_field() {
  FieldSpec f;
  f.key = "Height";
  f.value_type = ValueType::floating;
  f.canonical_unit = "cm";
  f.unit_conversions = {{"m", 100.0}, {"cm", 1.0}};
  return f;
}

FieldSpec plus_field() {
  FieldSpec f;
  f.key = "Result";
  f.value_type = ValueType::dictionary;
  f.options = {{{"+", "positive"}}};
  return f;
}

TEST(ConvertUnit, MetersToCentimeters) {
  EXPECT_DOUBLE_EQ(convert_unit(3.0, "m", cm_field()), 300.0);
}

TEST(ConvertUnit, CanonicalIsIdentity) {
  FieldSpec f;
  f.key = "HGB";
  f.value_type = ValueType::floating;
  f.canonical_unit = "g/L";
  EXPECT_DOUBLE_EQ(convert_unit(135.0, "g/L", f), 135.0);
}

TEST(ConvertUnit, UnknownUnitCarriesBothUnits) {
  try {
    convert_unit(7.0, "furlong", cm_field());
    FAIL() << "expected unit error";
  } catch (const Error& e) {
    std::string message = e.what();
    EXPECT_NE(message.find("furlong"), std::string::npos);
    EXPECT_NE(message.find("cm"), std::string::npos);
  }
}

TEST(ConvertUnit, RoundTripThroughCanonicalIsExact) {
  double converted = convert_unit(3.0, "m", cm_field());
  EXPECT_EQ(convert_unit(converted, "cm", cm_field()), converted);
}

TEST(MapOption, PlusToPositive) { EXPECT_EQ(map_option("+", plus_field()), "positive"); }

TEST(MapOption, CanonicalLabelIsFixedPoint) {
  EXPECT_EQ(map_option("positive", plus_field()), "positive");
}

TEST(MapOption, UnknownTokenIsError) { EXPECT_THROW(map_option("++", plus_field()), Error); }

TEST(CoerceType, IntegerValueIntoStringFieldStaysString) {
  FieldSpec f;
  f.key = "Bed No";
  f.value_type = ValueType::string;
  TypedValue v = coerce_type("42", f);
  EXPECT_EQ(v.kind, ValueType::string);
  EXPECT_EQ(v.text, "42");
}

TEST(CoerceType, FloatParses) {
  FieldSpec f;
  f.key = "WBC";
  f.value_type = ValueType::floating;
  EXPECT_DOUBLE_EQ(coerce_type("6.20", f).real, 6.2);
  EXPECT_DOUBLE_EQ(coerce_type("1.5e2", f).real, 150.0);
  EXPECT_THROW(coerce_type("six", f), Error);
}

TEST(CoerceType, IntegerParses) {
  FieldSpec f;
  f.key = "Age";
  f.value_type = ValueType::integer;
  EXPECT_EQ(coerce_type("42", f).integer, 42);
  EXPECT_EQ(coerce_type("-7", f).integer, -7);
  EXPECT_EQ(coerce_type("+7", f).integer, 7);
  EXPECT_THROW(coerce_type("4.2", f), Error);
  EXPECT_THROW(coerce_type("", f), Error);
}

TEST(CoerceType, IncompleteDateRejectedNeverCompleted) {
  FieldSpec f;
  f.key = "Report Time";
  f.value_type = ValueType::datetime;
  EXPECT_THROW(coerce_type("2024-05-", f), Error);
  EXPECT_THROW(coerce_type("2024-05", f), Error);
  EXPECT_THROW(coerce_type("2024-", f), Error);
}

TEST(CoerceType, DatetimeFormats) {
  FieldSpec f;
  f.key = "Report Time";
  f.value_type = ValueType::datetime;
  EXPECT_EQ(coerce_type("2024-05-12", f).text, "2024-05-12");
  EXPECT_EQ(coerce_type("2024/05/12", f).text, "2024-05-12");
  EXPECT_EQ(coerce_type("2024年5月12日", f).text, "2024-05-12");
  EXPECT_EQ(coerce_type("2024-05-12 10:30", f).text, "2024-05-12T10:30:00");
  EXPECT_EQ(coerce_type("2024-05-12T10:30:59", f).text, "2024-05-12T10:30:59");
  EXPECT_THROW(coerce_type("2024-13-01", f), Error);
  EXPECT_THROW(coerce_type("2023-02-29", f), Error);  // not a leap year
  EXPECT_THROW(coerce_type("2024-05-12 25:00", f), Error);
}

TEST(NormalizeExtraction, AliasAndUnitStandardized) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"esr_crp", "Sed rate", "15", "mm/h"});
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  ASSERT_EQ(result.pairs.size(), 1u);
  const KeyValuePair& p = result.pairs[0];
  EXPECT_EQ(p.scenario_id, "esr_crp");
  EXPECT_EQ(p.field_key, "Erythrocyte Sedimentation Rate (ESR)");
  EXPECT_EQ(p.value.kind, ValueType::floating);
  EXPECT_DOUBLE_EQ(p.value.real, 15.0);
  EXPECT_EQ(p.unit, "mm/h");
  EXPECT_TRUE(result.warnings.empty());
}

TEST(NormalizeExtraction, SourceUnitConverted) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"general", "Height", "1.7", "m"});
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(result.pairs[0].value.real, 170.0);
  EXPECT_EQ(result.pairs[0].unit, "cm");
}

TEST(NormalizeExtraction, EmptyInputEmptyResult) {
  ExtractionResult result = normalize_extraction({}, fixture(), "r1");
  EXPECT_TRUE(result.pairs.empty());
  EXPECT_TRUE(result.warnings.empty());
  EXPECT_EQ(result.report_id, "r1");
}

TEST(NormalizeExtraction, DuplicateKeepsFirstWithWarning) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"cbc", "Hemoglobin (HGB)", "135", "g/L"});
  raw.records.push_back({"cbc", "HGB", "140", "g/L"});  // alias of the same key
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(result.pairs[0].value.real, 135.0);
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("duplicate"), std::string::npos);
}

TEST(NormalizeExtraction, UnknownKeyBecomesWarningWithProvenance) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"cbc", "Quantum Flux", "1", std::nullopt});
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  EXPECT_TRUE(result.pairs.empty());
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("Quantum Flux"), std::string::npos);
}

TEST(NormalizeExtraction, UnknownScenarioFallsBackToGeneralFields) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"made_up", "Patient Name", "张三", std::nullopt});
  raw.records.push_back({"made_up", "Serum Iron (SI)", "12", "μmol/L"});
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_EQ(result.pairs[0].scenario_id, kGeneralScope);
  EXPECT_EQ(result.pairs[0].field_key, "Patient Name");
  EXPECT_EQ(result.warnings.size(), 1u);  // the scenario-scoped key is dropped
}

TEST(NormalizeExtraction, BadUnitFlaggedRecordDropped) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"cbc", "Hemoglobin (HGB)", "13.5", "stone"});
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  EXPECT_TRUE(result.pairs.empty());
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("stone"), std::string::npos);
  EXPECT_NE(result.warnings[0].find("g/L"), std::string::npos);
}

TEST(NormalizeExtraction, MissingUnitAssumedCanonical) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"cbc", "Hemoglobin (HGB)", "135", std::nullopt});
  ExtractionResult result = normalize_extraction(raw, schema, "r1");
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_EQ(result.pairs[0].unit, "g/L");
  EXPECT_DOUBLE_EQ(result.pairs[0].value.real, 135.0);
}

TEST(NormalizeExtraction, IntegerFieldAbsorbsCleanConversion) {
  Schema schema;
  ScenarioSpec s;
  s.id = "x";
  s.name = "X";
  s.cues = {"c"};
  FieldSpec f;
  f.key = "Count";
  f.value_type = ValueType::integer;
  f.canonical_unit = "cm";
  f.unit_conversions = {{"m", 100.0}};
  s.fields.push_back(f);
  schema.scenarios.push_back(s);

  RawExtraction raw;
  raw.records.push_back({"x", "Count", "3", "m"});
  ExtractionResult result = normalize_extraction(raw, schema, "r");
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_EQ(result.pairs[0].value.kind, ValueType::integer);
  EXPECT_EQ(result.pairs[0].value.integer, 300);
}

TEST(NormalizeExtraction, IdempotentOnCanonicalRecords) {
  Schema schema = fixture();
  RawExtraction raw;
  raw.records.push_back({"cbc", "Hemoglobin (HGB)", "135", "g/L"});
  raw.records.push_back({"general", "Patient Name", "张三", std::nullopt});
  raw.records.push_back({"general", "Report Time", "2024-05-12", std::nullopt});
  ExtractionResult first = normalize_extraction(raw, schema, "r1");

  // Feed the normalized pairs back through as raw records.
  RawExtraction again;
  for (const auto& p : first.pairs) {
    RawRecord r;
    r.scenario_id = p.scenario_id;
    r.key = p.field_key;
    switch (p.value.kind) {
      case ValueType::integer: r.value = std::to_string(p.value.integer); break;
      case ValueType::floating: r.value = std::to_string(p.value.real); break;
      default: r.value = p.value.text;
    }
    r.unit = p.unit;
    again.records.push_back(r);
  }
  ExtractionResult second = normalize_extraction(again, schema, "r1");
  ASSERT_EQ(second.pairs.size(), first.pairs.size());
  for (size_t i = 0; i < first.pairs.size(); ++i) {
    EXPECT_EQ(second.pairs[i].scenario_id, first.pairs[i].scenario_id);
    EXPECT_EQ(second.pairs[i].field_key, first.pairs[i].field_key);
    EXPECT_EQ(second.pairs[i].unit, first.pairs[i].unit);
    if (first.pairs[i].value.kind == ValueType::floating)
      EXPECT_DOUBLE_EQ(second.pairs[i].value.real, first.pairs[i].value.real);
    else
      EXPECT_EQ(second.pairs[i].value, first.pairs[i].value);
  }
}

TEST(NormalizeExtraction, FuzzTotalityAndWarningConservation) {
  Schema schema = fixture();
  std::mt19937_64 rng(2024);
  const std::vector<std::string> scenario_pool = {"cbc", "urinalysis", "general", "junk", ""};
  const std::vector<std::string> key_pool = {"Hemoglobin (HGB)", "HGB",   "Sed rate", "Patient Name",
                                             "Quantum Flux",     "WBC",   "尿蛋白",   "Age",
                                             "Report Time",      "Height"};
  const std::vector<std::string> value_pool = {"135", "6.2",  "abc", "2024-05-12", "2024-05-",
                                               "+",   "-7",   "",    "张三",       "1e3"};
  const std::vector<std::string> unit_pool = {"g/L", "m", "stone", "", "mm/h"};
  std::uniform_int_distribution<size_t> sc(0, scenario_pool.size() - 1);
  std::uniform_int_distribution<size_t> kp(0, key_pool.size() - 1);
  std::uniform_int_distribution<size_t> vp(0, value_pool.size() - 1);
  std::uniform_int_distribution<size_t> up(0, unit_pool.size() - 1);
  std::uniform_int_distribution<int> n_records(0, 20);
  std::uniform_int_distribution<int> coin(0, 1);

  for (int trial = 0; trial < 300; ++trial) {
    RawExtraction raw;
    int n = n_records(rng);
    for (int i = 0; i < n; ++i) {
      RawRecord r;
      r.scenario_id = scenario_pool[sc(rng)];
      r.key = key_pool[kp(rng)];
      r.value = value_pool[vp(rng)];
      if (coin(rng)) r.unit = unit_pool[up(rng)];
      raw.records.push_back(r);
    }
    ExtractionResult result = normalize_extraction(raw, schema, "fuzz");

    // Totality: all surviving pairs satisfy the KeyValuePair invariants.
    for (const auto& p : result.pairs) {
      const FieldSpec* spec = nullptr;
      if (p.scenario_id == kGeneralScope) {
        for (const auto& f : schema.general_fields)
          if (f.key == p.field_key) spec = &f;
      } else {
        const ScenarioSpec* s = schema.find_scenario(p.scenario_id);
        ASSERT_NE(s, nullptr) << p.scenario_id;
        for (const auto& f : s->fields)
          if (f.key == p.field_key) spec = &f;
      }
      ASSERT_NE(spec, nullptr) << p.field_key;
      if (spec->canonical_unit) EXPECT_EQ(p.unit, *spec->canonical_unit);
    }

    // Warning conservation: records = pairs + drops + duplicate collapses.
    size_t drops = 0, duplicates = 0;
    for (const auto& w : result.warnings) {
      if (w.rfind("record dropped", 0) == 0) ++drops;
      if (w.rfind("duplicate pair", 0) == 0) ++duplicates;
    }
    EXPECT_EQ(raw.records.size(), result.pairs.size() + drops + duplicates);
  }
}

TEST(RecordsFile, SerializeParseRoundTrip) {
  ExtractionResult result;
  result.report_id = "r7";
  result.schema_version = 3;
  result.warnings = {"w1"};
  KeyValuePair a{"cbc", "Hemoglobin (HGB)", TypedValue::of_float(135.5), "g/L", "(prov)"};
  KeyValuePair b{kGeneralScope, "Age", TypedValue::of_integer(42), "years", ""};
  KeyValuePair c{kGeneralScope, "Patient Name", TypedValue::of_string("张三"), std::nullopt, ""};
  result.pairs = {a, b, c};
  ExtractionResult back = parse_extraction_result(serialize_extraction_result(result));
  EXPECT_EQ(back, result);
}

}  // namespace
}  // namespace medrex
