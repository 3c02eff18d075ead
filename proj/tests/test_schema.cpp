#include "schema/schema.hpp"

#include <gtest/gtest.h>

#include <set>

#include "common/jsonio.hpp"

namespace medrex {
namespace {

Schema fixture() { return load_schema_file(MEDREX_FIXTURE_SCHEMA); }

FieldSpec make_field(const std::string& key, ValueType type = ValueType::floating) {
  FieldSpec f;
  f.key = key;
  f.value_type = type;
  return f;
}

ScenarioSpec make_scenario(const std::string& id) {
  ScenarioSpec s;
  s.id = id;
  s.name = id;
  s.cues = {id + " cue"};
  return s;
}

TEST(SchemaLoad, FixtureCounts) {
  Schema schema = fixture();
  EXPECT_EQ(schema.scenarios.size(), 13u);
  EXPECT_EQ(schema.detail_field_count(), 137u);
  EXPECT_EQ(schema.general_fields.size(), 18u);
  EXPECT_TRUE(validate_schema(schema).empty());
}

TEST(SchemaLoad, FixtureCoversAllValueTypesAndThirtyUnits) {
  Schema schema = fixture();
  std::set<std::string> units;
  std::set<ValueType> types;
  auto visit = [&](const FieldSpec& f) {
    types.insert(f.value_type);
    if (f.canonical_unit) units.insert(*f.canonical_unit);
    for (const auto& [unit, factor] : f.unit_conversions) units.insert(unit);
  };
  for (const auto& s : schema.scenarios)
    for (const auto& f : s.fields) visit(f);
  for (const auto& f : schema.general_fields) visit(f);
  EXPECT_EQ(types.size(), 5u);
  EXPECT_EQ(units.size(), 30u);
}

TEST(SchemaLoad, EmptySchemaIsValid) {
  Schema schema = load_schema(R"({"version": 1, "scenarios": [], "general_fields": []})");
  EXPECT_TRUE(schema.scenarios.empty());
  EXPECT_TRUE(schema.general_fields.empty());
}

TEST(SchemaLoad, DuplicateKeyInOneScenarioIsRejectedWithPath) {
  const char* text = R"({
    "version": 1,
    "scenarios": [{
      "id": "cbc", "name": "CBC", "cues": ["c"],
      "fields": [
        {"key": "WBC", "value_type": "float"},
        {"key": "WBC", "value_type": "float"}
      ]
    }],
    "general_fields": []
  })";
  try {
    load_schema(text);
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("scenarios[0].fields[1]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("field-key-duplicate"), std::string::npos);
  }
}

TEST(SchemaLoad, MalformedJsonIsParseError) {
  EXPECT_THROW(load_schema("{not json"), Error);
  try {
    load_schema("{\"version\": 1,");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(SchemaValidate, ValidFixtureHasNoViolations) {
  EXPECT_TRUE(validate_schema(fixture()).empty());
}

TEST(SchemaValidate, DictionaryWithoutOptions) {
  Schema schema;
  auto s = make_scenario("x");
  s.fields.push_back(make_field("Result", ValueType::dictionary));
  schema.scenarios.push_back(s);
  auto violations = validate_schema(schema);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "options-missing");
  EXPECT_EQ(violations[0].path, "scenarios[0].fields[0]");
}

TEST(SchemaValidate, ZeroConversionFactor) {
  Schema schema;
  auto s = make_scenario("x");
  auto f = make_field("Hemoglobin");
  f.canonical_unit = "g/L";
  f.unit_conversions = {{"g/dL", 0.0}};
  s.fields.push_back(f);
  schema.scenarios.push_back(s);
  auto violations = validate_schema(schema);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "unit-factor-invalid");
}

TEST(SchemaValidate, CanonicalUnitMustMapToOne) {
  Schema schema;
  auto s = make_scenario("x");
  auto f = make_field("Hemoglobin");
  f.canonical_unit = "g/L";
  f.unit_conversions = {{"g/L", 2.0}};
  s.fields.push_back(f);
  schema.scenarios.push_back(s);
  auto violations = validate_schema(schema);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "canonical-factor-not-one");
}

TEST(SchemaValidate, AliasCollisionWithinScenario) {
  Schema schema;
  auto s = make_scenario("x");
  auto a = make_field("Alpha");
  a.aliases = {"shared NAME"};
  auto b = make_field("Beta");
  b.aliases = {"Shared  name"};  // case/whitespace-insensitive collision
  s.fields = {a, b};
  schema.scenarios.push_back(s);
  auto violations = validate_schema(schema);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "alias-collision");
}

TEST(SchemaValidate, ScenarioKeyShadowingGeneralKeyNeedsAliasDeclaration) {
  Schema schema;
  schema.general_fields.push_back(make_field("Report Date", ValueType::datetime));
  auto s = make_scenario("x");
  s.fields.push_back(make_field("Report Date", ValueType::datetime));
  schema.scenarios.push_back(s);
  auto violations = validate_schema(schema);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "undeclared-name-overlap");

  // Declared through an alias instead: legal, scenario shadows on resolve.
  Schema declared;
  declared.general_fields.push_back(make_field("Report Date", ValueType::datetime));
  auto s2 = make_scenario("x");
  auto f = make_field("Panel Report Date", ValueType::datetime);
  f.aliases = {"Report Date"};
  s2.fields.push_back(f);
  declared.scenarios.push_back(s2);
  EXPECT_TRUE(validate_schema(declared).empty());
  auto ref = resolve_field(declared, std::optional<std::string>("x"), "Report Date");
  ASSERT_TRUE(ref.has_value());
  EXPECT_EQ(ref->spec->key, "Panel Report Date");
  EXPECT_EQ(ref->scenario_id, "x");
}

TEST(SchemaValidate, ReservedGeneralScenarioId) {
  Schema schema;
  schema.scenarios.push_back(make_scenario("general"));
  auto violations = validate_schema(schema);
  ASSERT_FALSE(violations.empty());
  EXPECT_EQ(violations[0].rule, "scenario-id-reserved");
}

TEST(ResolveField, SedRateResolvesToEsrKey) {
  Schema schema = fixture();
  auto ref = resolve_field(schema, std::optional<std::string>("esr_crp"), "Sed rate");
  ASSERT_TRUE(ref.has_value());
  EXPECT_EQ(ref->spec->key, "Erythrocyte Sedimentation Rate (ESR)");

  // Global search works too while the name is unique across the schema.
  auto global = resolve_field(schema, std::nullopt, "Sed rate");
  ASSERT_TRUE(global.has_value());
  EXPECT_EQ(global->spec->key, "Erythrocyte Sedimentation Rate (ESR)");
}

TEST(ResolveField, CanonicalKeyIsIdentity) {
  Schema schema = fixture();
  auto ref = resolve_field(schema, std::optional<std::string>("cbc"), "Hemoglobin (HGB)");
  ASSERT_TRUE(ref.has_value());
  EXPECT_EQ(ref->spec->key, "Hemoglobin (HGB)");
}

TEST(ResolveField, UnknownNameIsNotFound) {
  Schema schema = fixture();
  EXPECT_FALSE(resolve_field(schema, std::optional<std::string>("cbc"), "XYZ").has_value());
  EXPECT_FALSE(resolve_field(schema, std::nullopt, "XYZ").has_value());
}

TEST(ResolveField, CrossScenarioAmbiguityWithoutScope) {
  // "WBC" is an alias in both cbc and urinalysis.
  Schema schema = fixture();
  EXPECT_THROW(resolve_field(schema, std::nullopt, "WBC"), Error);
  auto scoped = resolve_field(schema, std::optional<std::string>("cbc"), "WBC");
  ASSERT_TRUE(scoped.has_value());
  EXPECT_EQ(scoped->spec->key, "White Blood Cell Count (WBC)");
}

TEST(ResolveField, AliasClosureIsTotal) {
  Schema schema = fixture();
  for (const auto& s : schema.scenarios) {
    for (const auto& f : s.fields) {
      for (const auto& alias : f.aliases) {
        auto ref = resolve_field(schema, std::optional<std::string>(s.id), alias);
        ASSERT_TRUE(ref.has_value()) << s.id << " / " << alias;
        EXPECT_EQ(ref->spec->key, f.key);
      }
    }
  }
  for (const auto& f : schema.general_fields) {
    for (const auto& alias : f.aliases) {
      auto ref = resolve_field(schema, std::nullopt, alias);
      ASSERT_TRUE(ref.has_value()) << alias;
      EXPECT_EQ(ref->spec->key, f.key);
    }
  }
}

TEST(AddScenario, IronProfileExample) {
  Schema schema = load_schema(R"({"version": 1, "scenarios": [], "general_fields": []})");
  ScenarioSpec spec = make_scenario("iron5");
  spec.name = "Five Iron Profile";
  spec.cues = {"Total Iron Binding Capacity (TIBC)", "Serum Ferritin (SF)"};
  Schema next = add_scenario(schema, spec);
  EXPECT_EQ(next.version, 2);
  EXPECT_NE(next.find_scenario("iron5"), nullptr);
  // Purity: the input value is untouched.
  EXPECT_EQ(schema.version, 1);
  EXPECT_TRUE(schema.scenarios.empty());
}

TEST(AddScenario, DuplicateIdConflicts) {
  Schema schema = fixture();
  EXPECT_THROW(add_scenario(schema, make_scenario("cbc")), Error);
}

TEST(AddScenario, InvalidSpecRejected) {
  Schema schema = fixture();
  ScenarioSpec spec = make_scenario("new_panel");
  spec.cues.clear();  // cues must be non-empty
  EXPECT_THROW(add_scenario(schema, spec), Error);
}

TEST(AddScenario, VersionStrictlyIncreases) {
  Schema schema = load_schema(R"({"version": 3, "scenarios": [], "general_fields": []})");
  Schema a = add_scenario(schema, make_scenario("one"));
  Schema b = add_scenario(a, make_scenario("two"));
  EXPECT_EQ(a.version, 4);
  EXPECT_EQ(b.version, 5);
}

TEST(SchemaRoundTrip, SerializeThenLoadIsIdentity) {
  Schema schema = fixture();
  std::string text = serialize_schema(schema);
  Schema reloaded = load_schema(text);
  EXPECT_EQ(schema, reloaded);
  // Byte-stable re-serialization, ordering preserved.
  EXPECT_EQ(serialize_schema(reloaded), text);
}

TEST(SchemaRoundTrip, FileOrderingPreserved) {
  // Scenario and field order in the serialized form follows the value.
  Schema schema = fixture();
  std::string text = serialize_schema(schema);
  json j = json::parse(text);
  ASSERT_EQ(j.at("scenarios").size(), schema.scenarios.size());
  for (size_t i = 0; i < schema.scenarios.size(); ++i)
    EXPECT_EQ(j.at("scenarios")[i].at("id").get<std::string>(), schema.scenarios[i].id);
}

}  // namespace
}  // namespace medrex
