#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schema/schema.hpp"

namespace medrex {

// Value already standardized against its FieldSpec. datetime carries the
// normalized ISO-8601 form, dictionary the canonical option label.
struct TypedValue {
  ValueType kind = ValueType::string;
  std::string text;      // datetime / string / dictionary
  std::int64_t integer = 0;
  double real = 0.0;

  static TypedValue of_string(std::string s) { return {ValueType::string, std::move(s), 0, 0.0}; }
  static TypedValue of_datetime(std::string iso) { return {ValueType::datetime, std::move(iso), 0, 0.0}; }
  static TypedValue of_option(std::string canonical) {
    return {ValueType::dictionary, std::move(canonical), 0, 0.0};
  }
  static TypedValue of_integer(std::int64_t v) { return {ValueType::integer, {}, v, 0.0}; }
  static TypedValue of_float(double v) { return {ValueType::floating, {}, 0, v}; }

  bool operator==(const TypedValue&) const = default;
};

struct KeyValuePair {
  std::string scenario_id;  // kGeneralScope for general fields
  std::string field_key;    // canonical key
  TypedValue value;
  std::optional<std::string> unit;  // canonical unit when the field declares one
  std::string provenance;           // raw record this pair came from

  bool operator==(const KeyValuePair&) const = default;
};

struct ExtractionResult {
  std::string report_id;
  int schema_version = 0;
  std::vector<KeyValuePair> pairs;
  std::vector<std::string> warnings;
  bool failed = false;

  bool operator==(const ExtractionResult&) const = default;
};

// File format shared by predictions and gold annotations.
std::string serialize_extraction_result(const ExtractionResult& result);
ExtractionResult parse_extraction_result(std::string_view text);
ExtractionResult parse_extraction_result_file(const std::string& path);

}  // namespace medrex
