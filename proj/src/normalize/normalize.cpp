#include "normalize/normalize.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

#include "common/strings.hpp"

namespace medrex {

namespace {

bool valid_date(int year, int month, int day) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  return ymd.ok();
}

// Normalized forms: "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS".
std::string parse_datetime(std::string_view raw) {
  static const std::regex iso_re(
      R"(^(\d{4})[-/](\d{1,2})[-/](\d{1,2})(?:[ T](\d{1,2}):(\d{2})(?::(\d{2}))?)?$)");
  static const std::regex cjk_re(R"(^(\d{4})年(\d{1,2})月(\d{1,2})日$)");

  std::string s(trim(raw));
  std::smatch m;
  bool matched = std::regex_match(s, m, iso_re) || std::regex_match(s, m, cjk_re);
  if (!matched) throw NormalizeError("not a recognized datetime: \"" + s + "\"");

  int year = std::stoi(m[1].str());
  int month = std::stoi(m[2].str());
  int day = std::stoi(m[3].str());
  if (!valid_date(year, month, day))
    throw NormalizeError("invalid calendar date: \"" + s + "\"");

  char buf[32];
  if (m.size() > 4 && m[4].matched) {
    int hour = std::stoi(m[4].str());
    int minute = std::stoi(m[5].str());
    int second = m[6].matched ? std::stoi(m[6].str()) : 0;
    if (hour > 23 || minute > 59 || second > 59)
      throw NormalizeError("invalid time of day: \"" + s + "\"");
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", year, month, day, hour, minute,
                  second);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  }
  return buf;
}

std::int64_t parse_integer(std::string_view raw) {
  std::string_view s = trim(raw);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) throw NormalizeError("empty integer value");
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw NormalizeError("not an integer: \"" + std::string(s) + "\"");
  return value;
}

double parse_float(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) throw NormalizeError("empty numeric value");
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
    throw NormalizeError("not a number: \"" + std::string(s) + "\"");
  return value;
}

std::string describe_record(const RawRecord& r) {
  std::string out = "(" + r.scenario_id + ", \"" + r.key + "\", \"" + r.value + "\"";
  if (r.unit) out += ", unit \"" + *r.unit + "\"";
  out += ")";
  return out;
}

}  // namespace

double convert_unit(double value, std::string_view source_unit, const FieldSpec& spec) {
  if (!spec.canonical_unit)
    throw NormalizeError("field \"" + spec.key + "\" declares no canonical unit");
  std::string_view source = trim(source_unit);
  if (source == *spec.canonical_unit) return value;
  for (const auto& [unit, factor] : spec.unit_conversions)
    if (unit == source) return value * factor;
  throw NormalizeError("no conversion from \"" + std::string(source) + "\" to \"" +
                       *spec.canonical_unit + "\" for field \"" + spec.key + "\"");
}

std::string map_option(std::string_view raw, const FieldSpec& spec) {
  if (spec.value_type != ValueType::dictionary || !spec.options)
    throw NormalizeError("field \"" + spec.key + "\" is not dictionary-typed");
  std::string token(trim(raw));
  for (const auto& [from, to] : *spec.options)
    if (from == token) return to;
  // Canonical labels are fixed points even when not listed as raw tokens.
  for (const auto& [from, to] : *spec.options)
    if (to == token) return to;
  throw NormalizeError("value \"" + token + "\" not among options of field \"" + spec.key + "\"");
}

TypedValue coerce_type(std::string_view raw, const FieldSpec& spec) {
  switch (spec.value_type) {
    case ValueType::string:
      return TypedValue::of_string(std::string(trim(raw)));
    case ValueType::integer:
      return TypedValue::of_integer(parse_integer(raw));
    case ValueType::floating:
      return TypedValue::of_float(parse_float(raw));
    case ValueType::datetime:
      return TypedValue::of_datetime(parse_datetime(raw));
    case ValueType::dictionary:
      return TypedValue::of_option(map_option(raw, spec));
  }
  throw NormalizeError("unhandled value type");
}

ExtractionResult normalize_extraction(const RawExtraction& raw, const Schema& schema,
                                      const std::string& report_id) {
  ExtractionResult result;
  result.report_id = report_id;
  result.schema_version = schema.version;

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& record : raw.records) {
    std::optional<FieldRef> ref;
    try {
      ref = resolve_field(schema, record.scenario_id, record.key);
    } catch (const Error& e) {
      result.warnings.push_back("record dropped, " + std::string(e.what()) + ": " +
                                describe_record(record));
      continue;
    }
    if (!ref) {
      result.warnings.push_back("record dropped, key \"" + record.key +
                                "\" not in schema: " + describe_record(record));
      continue;
    }
    const FieldSpec& spec = *ref->spec;

    KeyValuePair pair;
    pair.scenario_id = ref->scenario_id;
    pair.field_key = spec.key;
    pair.provenance = describe_record(record);

    try {
      // Numeric values are converted before coercion so an integer field can
      // absorb a unit change (e.g. 3 m -> 300 cm) without a fractional step.
      if (spec.canonical_unit) {
        pair.unit = *spec.canonical_unit;
        bool needs_conversion = record.unit && trim(*record.unit) != *spec.canonical_unit;
        if (needs_conversion &&
            (spec.value_type == ValueType::integer || spec.value_type == ValueType::floating)) {
          double converted = convert_unit(parse_float(record.value), *record.unit, spec);
          if (spec.value_type == ValueType::integer) {
            double rounded = std::round(converted);
            if (std::abs(converted - rounded) > 1e-9)
              throw NormalizeError("conversion of \"" + record.value + "\" " + *record.unit +
                                   " yields non-integer " + std::to_string(converted));
            pair.value = TypedValue::of_integer(static_cast<std::int64_t>(rounded));
          } else {
            pair.value = TypedValue::of_float(converted);
          }
        } else {
          if (record.unit && needs_conversion)
            // Non-numeric field with a foreign unit: surface the unit error.
            convert_unit(0.0, *record.unit, spec);
          pair.value = coerce_type(record.value, spec);
        }
      } else {
        if (record.unit && !trim(*record.unit).empty())
          result.warnings.push_back("unit \"" + *record.unit + "\" ignored for unitless field \"" +
                                    spec.key + "\"");
        pair.value = coerce_type(record.value, spec);
      }
    } catch (const Error& e) {
      result.warnings.push_back("record dropped, " + std::string(e.what()) + ": " +
                                describe_record(record));
      continue;
    }

    auto key = std::make_pair(pair.scenario_id, pair.field_key);
    if (!seen.insert(key).second) {
      result.warnings.push_back("duplicate pair (" + pair.scenario_id + ", " + pair.field_key +
                                ") collapsed, keeping the first occurrence");
      continue;
    }
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

}  // namespace medrex
