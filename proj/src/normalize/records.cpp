#include "normalize/records.hpp"

#include "common/jsonio.hpp"

namespace medrex {

namespace {

json value_to_json(const TypedValue& v) {
  switch (v.kind) {
    case ValueType::integer: return v.integer;
    case ValueType::floating: return v.real;
    default: return v.text;
  }
}

TypedValue value_from_json(ValueType kind, const json& j) {
  TypedValue v;
  v.kind = kind;
  switch (kind) {
    case ValueType::integer: v.integer = j.get<std::int64_t>(); break;
    case ValueType::floating: v.real = j.get<double>(); break;
    default: v.text = j.get<std::string>(); break;
  }
  return v;
}

}  // namespace

std::string serialize_extraction_result(const ExtractionResult& result) {
  json j = json::object();
  j["report_id"] = result.report_id;
  j["schema_version"] = result.schema_version;
  json pairs = json::array();
  for (const auto& p : result.pairs) {
    json pj = json::object();
    pj["scenario_id"] = p.scenario_id;
    pj["key"] = p.field_key;
    pj["type"] = value_type_name(p.value.kind);
    pj["value"] = value_to_json(p.value);
    pj["unit"] = p.unit ? json(*p.unit) : json(nullptr);
    if (!p.provenance.empty()) pj["provenance"] = p.provenance;
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = pairs;
  j["warnings"] = result.warnings;
  if (result.failed) j["failed"] = true;
  return j.dump(2) + "\n";
}

ExtractionResult parse_extraction_result(std::string_view text) {
  json j = parse_json(text, "extraction result");
  ExtractionResult result;
  result.report_id = j.value("report_id", "");
  result.schema_version = j.value("schema_version", 0);
  result.failed = j.value("failed", false);
  if (j.contains("warnings"))
    for (const auto& w : j.at("warnings")) result.warnings.push_back(w.get<std::string>());
  if (j.contains("pairs")) {
    for (const auto& pj : j.at("pairs")) {
      KeyValuePair p;
      p.scenario_id = pj.value("scenario_id", "");
      p.field_key = pj.value("key", "");
      auto kind = value_type_from_name(pj.value("type", "string"));
      if (!kind) throw parse_error("extraction result: unknown value type in pair for " + p.field_key);
      try {
        p.value = value_from_json(*kind, pj.at("value"));
      } catch (const nlohmann::json::exception& e) {
        throw parse_error("extraction result: bad value for " + p.field_key + ": " + e.what());
      }
      if (pj.contains("unit") && !pj.at("unit").is_null())
        p.unit = pj.at("unit").get<std::string>();
      p.provenance = pj.value("provenance", "");
      result.pairs.push_back(std::move(p));
    }
  }
  return result;
}

ExtractionResult parse_extraction_result_file(const std::string& path) {
  return parse_extraction_result(read_file(path));
}

}  // namespace medrex
