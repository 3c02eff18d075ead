#include "schema/schema.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "common/jsonio.hpp"
#include "common/strings.hpp"

namespace medrex {

namespace {

const std::unordered_map<std::string_view, ValueType> kTypeNames = {
    {"datetime", ValueType::datetime},
    {"integer", ValueType::integer},
    {"string", ValueType::string},
    {"float", ValueType::floating},
    {"dictionary", ValueType::dictionary},
};

std::vector<std::string> fold_names(const FieldSpec& f) {
  std::vector<std::string> out;
  out.push_back(fold_name(f.key));
  for (const auto& a : f.aliases) out.push_back(fold_name(a));
  return out;
}

void validate_field(const FieldSpec& f, const std::string& path, std::vector<Violation>& out) {
  if (trim(f.key).empty())
    out.push_back({path, "field-key-empty", "field key must be non-empty"});
  if (f.value_type == ValueType::dictionary) {
    if (!f.options || f.options->empty())
      out.push_back({path, "options-missing",
                     "dictionary-typed field \"" + f.key + "\" declares no options"});
  } else if (f.options) {
    out.push_back({path, "options-forbidden",
                   "field \"" + f.key + "\" of type " + value_type_name(f.value_type) +
                       " must not declare options"});
  }
  for (const auto& [unit, factor] : f.unit_conversions) {
    if (!std::isfinite(factor) || factor <= 0.0)
      out.push_back({path + ".unit_conversions[" + unit + "]", "unit-factor-invalid",
                     "conversion factor for \"" + unit + "\" must be finite and > 0"});
    if (f.canonical_unit && unit == *f.canonical_unit && factor != 1.0)
      out.push_back({path + ".unit_conversions[" + unit + "]", "canonical-factor-not-one",
                     "canonical unit \"" + unit + "\" must map to factor 1"});
  }
  if (!f.unit_conversions.empty() && !f.canonical_unit)
    out.push_back({path, "conversions-without-canonical",
                   "field \"" + f.key + "\" has unit conversions but no canonical unit"});
}

// One scope = one scenario's fields or the general fields. Keys unique; no
// alias may equal another field's key or alias (case-insensitive).
void validate_scope(const std::vector<FieldSpec>& fields, const std::string& path_prefix,
                    std::vector<Violation>& out) {
  struct Owner {
    std::string path;
    bool is_key;
  };
  std::unordered_map<std::string, Owner> seen;  // folded name -> first owner
  for (size_t i = 0; i < fields.size(); ++i) {
    std::string path = path_prefix + "[" + std::to_string(i) + "]";
    auto names = fold_names(fields[i]);
    std::unordered_set<std::string> mine;
    for (size_t n = 0; n < names.size(); ++n) {
      const std::string& name = names[n];
      bool is_key = (n == 0);
      if (name.empty()) continue;
      if (!mine.insert(name).second) continue;  // a field may repeat its own name
      auto [it, inserted] = seen.emplace(name, Owner{path, is_key});
      if (!inserted) {
        bool both_keys = is_key && it->second.is_key;
        out.push_back({path, both_keys ? "field-key-duplicate" : "alias-collision",
                       "name \"" + name + "\" already used by " + it->second.path});
      }
    }
  }
}

FieldSpec field_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw parse_error(path + ": field must be an object");
  FieldSpec f;
  f.key = j.value("key", "");
  if (j.contains("aliases")) {
    for (const auto& a : j.at("aliases")) f.aliases.push_back(a.get<std::string>());
  }
  std::string tname = j.value("value_type", "string");
  auto vt = value_type_from_name(tname);
  if (!vt) throw parse_error(path + ".value_type: unknown type \"" + tname + "\"");
  f.value_type = *vt;
  if (j.contains("canonical_unit") && !j.at("canonical_unit").is_null())
    f.canonical_unit = j.at("canonical_unit").get<std::string>();
  if (j.contains("unit_conversions") && !j.at("unit_conversions").is_null()) {
    for (auto it = j.at("unit_conversions").begin(); it != j.at("unit_conversions").end(); ++it)
      f.unit_conversions.emplace_back(it.key(), it.value().get<double>());
  }
  if (j.contains("options") && !j.at("options").is_null()) {
    std::vector<std::pair<std::string, std::string>> opts;
    for (auto it = j.at("options").begin(); it != j.at("options").end(); ++it)
      opts.emplace_back(it.key(), it.value().get<std::string>());
    f.options = std::move(opts);
  }
  f.description = j.value("description", "");
  return f;
}

json field_to_json(const FieldSpec& f) {
  json j = json::object();
  j["key"] = f.key;
  j["aliases"] = f.aliases;
  j["value_type"] = value_type_name(f.value_type);
  j["canonical_unit"] = f.canonical_unit ? json(*f.canonical_unit) : json(nullptr);
  json conv = json::object();
  for (const auto& [unit, factor] : f.unit_conversions) conv[unit] = factor;
  j["unit_conversions"] = conv;
  if (f.options) {
    json opts = json::object();
    for (const auto& [raw, canonical] : *f.options) opts[raw] = canonical;
    j["options"] = opts;
  } else {
    j["options"] = nullptr;
  }
  j["description"] = f.description;
  return j;
}

ScenarioSpec scenario_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw parse_error(path + ": scenario must be an object");
  ScenarioSpec s;
  s.id = j.value("id", "");
  s.name = j.value("name", "");
  if (j.contains("cues"))
    for (const auto& c : j.at("cues")) s.cues.push_back(c.get<std::string>());
  if (j.contains("few_shot_directives")) {
    for (const auto& d : j.at("few_shot_directives"))
      s.few_shot_directives.push_back(
          {d.value("condition", ""), d.value("conclusion", "")});
  }
  if (j.contains("fields")) {
    const auto& fields = j.at("fields");
    for (size_t i = 0; i < fields.size(); ++i)
      s.fields.push_back(field_from_json(fields[i], path + ".fields[" + std::to_string(i) + "]"));
  }
  return s;
}

json scenario_to_json(const ScenarioSpec& s) {
  json j = json::object();
  j["id"] = s.id;
  j["name"] = s.name;
  j["cues"] = s.cues;
  json dirs = json::array();
  for (const auto& d : s.few_shot_directives)
    dirs.push_back({{"condition", d.condition}, {"conclusion", d.conclusion}});
  j["few_shot_directives"] = dirs;
  json fields = json::array();
  for (const auto& f : s.fields) fields.push_back(field_to_json(f));
  j["fields"] = fields;
  return j;
}

// Collects matches of a folded surface name in one field list.
void collect_matches(const std::vector<FieldSpec>& fields, const std::string& scope,
                     const std::string& folded, std::vector<FieldRef>& out) {
  for (const auto& f : fields) {
    if (fold_name(f.key) == folded) {
      out.push_back({&f, scope});
      continue;
    }
    for (const auto& a : f.aliases) {
      if (fold_name(a) == folded) {
        out.push_back({&f, scope});
        break;
      }
    }
  }
}

}  // namespace

const char* value_type_name(ValueType t) {
  switch (t) {
    case ValueType::datetime: return "datetime";
    case ValueType::integer: return "integer";
    case ValueType::string: return "string";
    case ValueType::floating: return "float";
    case ValueType::dictionary: return "dictionary";
  }
  return "string";
}

std::optional<ValueType> value_type_from_name(std::string_view name) {
  auto it = kTypeNames.find(name);
  if (it == kTypeNames.end()) return std::nullopt;
  return it->second;
}

const ScenarioSpec* Schema::find_scenario(std::string_view id) const {
  for (const auto& s : scenarios)
    if (s.id == id) return &s;
  return nullptr;
}

size_t Schema::detail_field_count() const {
  size_t n = 0;
  for (const auto& s : scenarios) n += s.fields.size();
  return n;
}

std::vector<Violation> validate_schema(const Schema& schema) {
  std::vector<Violation> out;

  std::unordered_set<std::string> scenario_ids;
  for (size_t i = 0; i < schema.scenarios.size(); ++i) {
    const auto& s = schema.scenarios[i];
    std::string path = "scenarios[" + std::to_string(i) + "]";
    if (trim(s.id).empty())
      out.push_back({path, "scenario-id-empty", "scenario id must be non-empty"});
    if (s.id == kGeneralScope)
      out.push_back({path, "scenario-id-reserved",
                     std::string("scenario id \"") + kGeneralScope + "\" is reserved"});
    if (!scenario_ids.insert(s.id).second)
      out.push_back({path, "scenario-id-duplicate", "duplicate scenario id \"" + s.id + "\""});
    if (s.cues.empty())
      out.push_back({path, "cues-empty", "scenario \"" + s.id + "\" declares no cues"});
    for (size_t k = 0; k < s.fields.size(); ++k)
      validate_field(s.fields[k], path + ".fields[" + std::to_string(k) + "]", out);
    validate_scope(s.fields, path + ".fields", out);
  }

  for (size_t k = 0; k < schema.general_fields.size(); ++k)
    validate_field(schema.general_fields[k], "general_fields[" + std::to_string(k) + "]", out);
  validate_scope(schema.general_fields, "general_fields", out);

  // A scenario field may shadow a general field only when the shared name is
  // declared through an alias on one side; two bare keys colliding is an error.
  for (size_t i = 0; i < schema.scenarios.size(); ++i) {
    const auto& s = schema.scenarios[i];
    for (size_t k = 0; k < s.fields.size(); ++k) {
      const auto& f = s.fields[k];
      std::string fkey = fold_name(f.key);
      for (size_t g = 0; g < schema.general_fields.size(); ++g) {
        if (fkey == fold_name(schema.general_fields[g].key))
          out.push_back({"scenarios[" + std::to_string(i) + "].fields[" + std::to_string(k) + "]",
                         "undeclared-name-overlap",
                         "key \"" + f.key + "\" collides with general_fields[" +
                             std::to_string(g) + "]; declare the shared name as an alias"});
      }
    }
  }

  if (schema.version < 0)
    out.push_back({"version", "version-negative", "schema version must be >= 0"});

  return out;
}

std::pair<Schema, std::vector<Violation>> load_schema_lenient(std::string_view text) {
  json j = parse_json(text, "schema");
  if (!j.is_object()) throw parse_error("schema: top level must be an object");
  Schema schema;
  schema.version = j.value("version", 1);
  if (j.contains("scenarios")) {
    const auto& arr = j.at("scenarios");
    for (size_t i = 0; i < arr.size(); ++i)
      schema.scenarios.push_back(scenario_from_json(arr[i], "scenarios[" + std::to_string(i) + "]"));
  }
  if (j.contains("general_fields")) {
    const auto& arr = j.at("general_fields");
    for (size_t i = 0; i < arr.size(); ++i)
      schema.general_fields.push_back(
          field_from_json(arr[i], "general_fields[" + std::to_string(i) + "]"));
  }
  auto violations = validate_schema(schema);
  return {std::move(schema), std::move(violations)};
}

Schema load_schema(std::string_view text) {
  auto [schema, violations] = load_schema_lenient(text);
  if (!violations.empty())
    throw validation_error("schema validation failed:\n" + violations_to_string(violations));
  return schema;
}

Schema load_schema_file(const std::string& path) { return load_schema(read_file(path)); }

std::string serialize_schema(const Schema& schema) {
  json j = json::object();
  j["version"] = schema.version;
  json scenarios = json::array();
  for (const auto& s : schema.scenarios) scenarios.push_back(scenario_to_json(s));
  j["scenarios"] = scenarios;
  json generals = json::array();
  for (const auto& f : schema.general_fields) generals.push_back(field_to_json(f));
  j["general_fields"] = generals;
  return j.dump(2) + "\n";
}

ScenarioSpec scenario_from_json_text(std::string_view text) {
  json j = parse_json(text, "scenario");
  return scenario_from_json(j, "scenario");
}

std::optional<FieldRef> resolve_field(const Schema& schema,
                                      const std::optional<std::string>& scenario_id,
                                      std::string_view surface_name) {
  std::string folded = fold_name(surface_name);
  if (folded.empty()) return std::nullopt;

  if (scenario_id) {
    if (const ScenarioSpec* s = schema.find_scenario(*scenario_id)) {
      std::vector<FieldRef> hits;
      collect_matches(s->fields, s->id, folded, hits);
      if (hits.size() == 1) return hits.front();
      if (hits.size() > 1) {
        std::string msg = "ambiguous field name \"" + std::string(surface_name) + "\" in scenario " +
                          s->id + ": candidates";
        for (const auto& h : hits) msg += " \"" + h.spec->key + "\"";
        throw validation_error(msg);
      }
    }
    std::vector<FieldRef> hits;
    collect_matches(schema.general_fields, kGeneralScope, folded, hits);
    if (hits.size() == 1) return hits.front();
    if (hits.size() > 1) {
      std::string msg =
          "ambiguous field name \"" + std::string(surface_name) + "\" in general fields: candidates";
      for (const auto& h : hits) msg += " \"" + h.spec->key + "\"";
      throw validation_error(msg);
    }
    return std::nullopt;
  }

  std::vector<FieldRef> hits;
  for (const auto& s : schema.scenarios) collect_matches(s.fields, s.id, folded, hits);
  collect_matches(schema.general_fields, kGeneralScope, folded, hits);
  if (hits.empty()) return std::nullopt;
  if (hits.size() > 1) {
    std::string msg = "ambiguous field name \"" + std::string(surface_name) + "\": candidates";
    for (const auto& h : hits) msg += " " + h.scenario_id + "/\"" + h.spec->key + "\"";
    throw validation_error(msg);
  }
  return hits.front();
}

Schema add_scenario(const Schema& schema, ScenarioSpec spec) {
  if (schema.find_scenario(spec.id))
    throw validation_error("scenario id \"" + spec.id + "\" already exists");
  Schema next = schema;
  next.scenarios.push_back(std::move(spec));
  next.version = schema.version + 1;
  auto violations = validate_schema(next);
  if (!violations.empty())
    throw validation_error("scenario rejected:\n" + violations_to_string(violations));
  return next;
}

std::string violations_to_string(const std::vector<Violation>& violations) {
  std::ostringstream ss;
  for (const auto& v : violations) ss << "  " << v.path << " [" << v.rule << "]: " << v.message << "\n";
  return ss.str();
}

}  // namespace medrex
