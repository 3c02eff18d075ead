#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common/errors.hpp"

namespace medrex {

enum class ValueType { datetime, integer, string, floating, dictionary };

const char* value_type_name(ValueType t);
std::optional<ValueType> value_type_from_name(std::string_view name);

struct FieldSpec {
  std::string key;
  std::vector<std::string> aliases;
  ValueType value_type = ValueType::string;
  std::optional<std::string> canonical_unit;
  // Source unit -> multiplicative factor to the canonical unit. Order preserved.
  std::vector<std::pair<std::string, double>> unit_conversions;
  // Raw token -> canonical option label. Present iff value_type == dictionary.
  std::optional<std::vector<std::pair<std::string, std::string>>> options;
  std::string description;

  bool operator==(const FieldSpec&) const = default;
};

struct FewShotDirective {
  std::string condition;
  std::string conclusion;

  bool operator==(const FewShotDirective&) const = default;
};

struct ScenarioSpec {
  std::string id;
  std::string name;
  std::vector<std::string> cues;
  std::vector<FewShotDirective> few_shot_directives;
  std::vector<FieldSpec> fields;

  bool operator==(const ScenarioSpec&) const = default;
};

// Scenario id reserved for pairs extracted from general fields.
inline constexpr const char* kGeneralScope = "general";

struct Schema {
  int version = 1;
  std::vector<ScenarioSpec> scenarios;
  std::vector<FieldSpec> general_fields;

  const ScenarioSpec* find_scenario(std::string_view id) const;
  size_t detail_field_count() const;

  bool operator==(const Schema&) const = default;
};

struct Violation {
  std::string path;  // e.g. "scenarios[2].fields[5]"
  std::string rule;  // stable rule identifier
  std::string message;
};

std::vector<Violation> validate_schema(const Schema& schema);

// Throws parse_error on malformed JSON (with position) and validation_error
// listing every violation; never returns a partially valid schema.
Schema load_schema(std::string_view text);
Schema load_schema_file(const std::string& path);

// Parses without rejecting validation failures; returns them alongside.
std::pair<Schema, std::vector<Violation>> load_schema_lenient(std::string_view text);

std::string serialize_schema(const Schema& schema);
ScenarioSpec scenario_from_json_text(std::string_view text);

struct FieldRef {
  const FieldSpec* spec = nullptr;
  std::string scenario_id;  // kGeneralScope for general fields
};

// Looks up a surface name (key or alias, case-folded, whitespace-collapsed).
// With a scenario id, that scenario is searched first, then general fields.
// Without one, every scenario plus the general fields are searched; more than
// one distinct hit raises a validation error listing the candidates.
std::optional<FieldRef> resolve_field(const Schema& schema,
                                      const std::optional<std::string>& scenario_id,
                                      std::string_view surface_name);

// Pure derivation: returns a schema containing `spec`, version bumped by one.
Schema add_scenario(const Schema& schema, ScenarioSpec spec);

std::string violations_to_string(const std::vector<Violation>& violations);

}  // namespace medrex
