#include "prompt/prompt.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "common/errors.hpp"
#include "common/jsonio.hpp"
#include "common/strings.hpp"

namespace medrex {

namespace {

constexpr const char* kPrecorrectionBody = R"(You are cleaning up raw OCR output from a scanned medical report.

Task: correct recognition errors in the text below without inventing content.
- Fix positional errors where fragments were stitched out of reading order.
- Fix confusions between visually similar characters such as "l" and "1" or "O" and "0".
- Keep every label, value, and unit; do not add, remove, or reword anything else.

Return the corrected text inside a single fenced block and nothing else.

Input text:
{{ocr_text}}
)";

constexpr const char* kClassificationBody = R"(You are classifying a medical report against a fixed list of scenario categories.

Task: decide which scenarios the report below contains. A report usually maps
to between 1 and 3 scenarios.

Output format: a single fenced block containing JSON of the form
{"scenarios": ["<scenario_id>", ...]}
with 1 to 3 scenario ids and nothing else.

Known scenarios:
{{schema}}

Hints:
{{few_shots}}

Report text:
{{ocr_text}}
)";

constexpr const char* kExtractionRules = R"(Standardization rules:
- Write every field under its canonical key, even when the report uses an alias.
- Convert numeric values to the canonical unit using the listed factors
  (a length of 3 m becomes 300 cm when the canonical unit is cm).
- Map dictionary values to their canonical option labels.
- Format each value per its declared type: datetime as ISO 8601, integer as
  plain digits, float as a decimal number, string verbatim.

Output format: a single fenced block containing JSON of the form
{"records": [{"scenario_id": "...", "key": "...", "value": "...", "unit": "..."}]}
Use scenario_id "general" for the general report fields and null for the unit
when a field has none. Output nothing else.
)";

const std::string kExtractionBody =
    std::string(R"(You are extracting key-value records from a medical report according to a schema.

Task: for the scenarios {{scenario_ids}}, extract every schema field present in
the report text, plus the general report fields.

)") + kExtractionRules +
    R"(
Schema:
{{schema}}

Report text:
{{ocr_text}}
)";

const std::string kBaselineBody =
    std::string(R"(You are extracting key-value records from a medical report according to a schema.

Task: extract every schema field present in the report text across all
scenarios below, plus the general report fields. Decide which scenarios apply
as you extract.

)") + kExtractionRules +
    R"(
Schema:
{{schema}}

Report text:
{{ocr_text}}
)";

std::vector<std::string> required_for(TemplateId id) {
  switch (id) {
    case TemplateId::precorrection: return {"ocr_text"};
    case TemplateId::classification: return {"schema", "few_shots", "ocr_text"};
    case TemplateId::extraction: return {"schema", "scenario_ids", "ocr_text"};
    case TemplateId::baseline: return {"schema", "ocr_text"};
  }
  return {};
}

size_t count_occurrences(std::string_view body, std::string_view token) {
  size_t n = 0, pos = 0;
  while ((pos = body.find(token, pos)) != std::string_view::npos) {
    ++n;
    pos += token.size();
  }
  return n;
}

void validate_template(const PromptTemplate& t) {
  for (const auto& name : t.required_placeholders) {
    std::string token = "{{" + name + "}}";
    size_t n = count_occurrences(t.body, token);
    if (n != 1)
      throw validation_error("template " + std::string(template_id_name(t.id)) + ": placeholder " +
                             token + " must appear exactly once (found " + std::to_string(n) + ")");
  }
}

std::string substitute(std::string body, const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) body = replace_all(std::move(body), "{{" + name + "}}", value);
  return body;
}

std::string format_factor(double f) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", f);
  return buf;
}

std::string render_field_line(const FieldSpec& f) {
  std::ostringstream line;
  line << "  - " << f.key << " | type: " << value_type_name(f.value_type);
  if (f.canonical_unit) {
    line << " | unit: " << *f.canonical_unit;
    if (!f.unit_conversions.empty()) {
      line << " | convert:";
      bool first = true;
      for (const auto& [unit, factor] : f.unit_conversions) {
        if (unit == *f.canonical_unit) continue;
        line << (first ? " " : "; ") << "1 " << unit << " = " << format_factor(factor) << " "
             << *f.canonical_unit;
        first = false;
      }
    }
  }
  if (f.options) {
    line << " | options:";
    bool first = true;
    for (const auto& [raw, canonical] : *f.options) {
      line << (first ? " " : "; ") << raw << " -> " << canonical;
      first = false;
    }
  }
  if (!f.aliases.empty()) {
    line << " | aliases: ";
    for (size_t i = 0; i < f.aliases.size(); ++i) line << (i ? ", " : "") << f.aliases[i];
  }
  if (!f.description.empty()) line << " | note: " << f.description;
  return line.str();
}

std::string render_scenario_list(const Schema& schema) {
  if (schema.scenarios.empty()) return "(none)";
  std::ostringstream out;
  for (size_t i = 0; i < schema.scenarios.size(); ++i) {
    const auto& s = schema.scenarios[i];
    if (i) out << "\n";
    out << "- " << s.id << ": " << s.name << " | cues: ";
    for (size_t c = 0; c < s.cues.size(); ++c) out << (c ? "; " : "") << s.cues[c];
  }
  return out.str();
}

std::string render_few_shots(const Schema& schema) {
  std::ostringstream out;
  bool any = false;
  for (const auto& s : schema.scenarios) {
    for (const auto& d : s.few_shot_directives) {
      if (any) out << "\n";
      out << "- When the text includes " << d.condition << ", conclude " << s.id << ": "
          << d.conclusion;
      any = true;
    }
  }
  return any ? out.str() : "(none)";
}

std::string render_fields_schema(const Schema& schema, const std::vector<const ScenarioSpec*>& selected) {
  std::ostringstream out;
  for (const ScenarioSpec* s : selected) {
    out << "Scenario " << s->id << " (" << s->name << "):\n";
    if (s->fields.empty()) out << "  (no scenario-specific fields)\n";
    for (const auto& f : s->fields) out << render_field_line(f) << "\n";
  }
  out << "General fields:\n";
  if (schema.general_fields.empty()) out << "  (none)\n";
  for (const auto& f : schema.general_fields) out << render_field_line(f) << "\n";
  std::string text = out.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

json fenced_json(std::string_view response, std::string_view what) {
  auto block = find_fenced_block(response);
  if (!block)
    throw parse_error(std::string(what) + ": no fenced block found in response:\n" +
                      std::string(response));
  try {
    return json::parse(*block);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string(what) + ": fenced block is not valid JSON (" + e.what() +
                      ") in response:\n" + std::string(response));
  }
}

}  // namespace

const char* template_id_name(TemplateId id) {
  switch (id) {
    case TemplateId::precorrection: return "precorrection";
    case TemplateId::classification: return "classification";
    case TemplateId::extraction: return "extraction";
    case TemplateId::baseline: return "baseline";
  }
  return "precorrection";
}

TemplateSet TemplateSet::defaults() {
  TemplateSet set;
  set.templates_ = {
      {TemplateId::precorrection, kPrecorrectionBody, required_for(TemplateId::precorrection)},
      {TemplateId::classification, kClassificationBody, required_for(TemplateId::classification)},
      {TemplateId::extraction, kExtractionBody, required_for(TemplateId::extraction)},
      {TemplateId::baseline, kBaselineBody, required_for(TemplateId::baseline)},
  };
  for (const auto& t : set.templates_) validate_template(t);
  return set;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
  TemplateSet set;
  for (TemplateId id : {TemplateId::precorrection, TemplateId::classification,
                        TemplateId::extraction, TemplateId::baseline}) {
    PromptTemplate t;
    t.id = id;
    t.body = read_file(std::filesystem::path(dir) / (std::string(template_id_name(id)) + ".txt"));
    t.required_placeholders = required_for(id);
    validate_template(t);
    set.templates_.push_back(std::move(t));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(TemplateId id) const {
  for (const auto& t : templates_)
    if (t.id == id) return t;
  throw usage_error("template set does not contain " + std::string(template_id_name(id)));
}

std::string fence_block(std::string_view content) {
  size_t longest = 0, run = 0;
  for (char c : content) {
    run = (c == '`') ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  std::string fence(std::max<size_t>(3, longest + 1), '`');
  std::string out = fence + "\n";
  out += content;
  if (!content.empty() && content.back() != '\n') out += "\n";
  out += fence;
  return out;
}

std::optional<std::string> find_fenced_block(std::string_view text) {
  size_t pos = 0;
  std::optional<size_t> open_len;
  std::vector<std::string_view> content;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                           : eol - pos);
    std::string_view stripped = trim(line);
    size_t ticks = 0;
    while (ticks < stripped.size() && stripped[ticks] == '`') ++ticks;

    if (!open_len) {
      if (ticks >= 3) open_len = ticks;  // rest of line is an info string
    } else if (ticks >= *open_len && ticks == stripped.size()) {
      std::string out;
      for (size_t i = 0; i < content.size(); ++i) {
        if (i) out.push_back('\n');
        out += content[i];
      }
      return out;
    } else {
      content.push_back(line);
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  if (!open_len) return std::nullopt;
  // Unclosed fence: treat the remainder as the block (tolerates truncation).
  std::string out;
  for (size_t i = 0; i < content.size(); ++i) {
    if (i) out.push_back('\n');
    out += content[i];
  }
  return out;
}

std::string build_precorrection_prompt(const TemplateSet& templates, std::string_view raw_ocr_text) {
  if (raw_ocr_text.empty()) throw usage_error("precorrection prompt requires non-empty OCR text");
  return substitute(templates.get(TemplateId::precorrection).body,
                    {{"ocr_text", fence_block(raw_ocr_text)}});
}

std::string build_classification_prompt(const TemplateSet& templates, const Schema& schema,
                                        std::string_view masked_text) {
  return substitute(templates.get(TemplateId::classification).body,
                    {{"schema", render_scenario_list(schema)},
                     {"few_shots", render_few_shots(schema)},
                     {"ocr_text", fence_block(masked_text)}});
}

std::string build_extraction_prompt(const TemplateSet& templates, const Schema& schema,
                                    const std::vector<std::string>& scenario_ids,
                                    std::string_view masked_text) {
  if (scenario_ids.empty()) throw usage_error("extraction prompt requires at least one scenario id");
  std::vector<const ScenarioSpec*> selected;
  std::string joined;
  for (const auto& id : scenario_ids) {
    const ScenarioSpec* s = schema.find_scenario(id);
    if (!s) throw usage_error("unknown scenario id \"" + id + "\"");
    selected.push_back(s);
    if (!joined.empty()) joined += ", ";
    joined += id;
  }
  return substitute(templates.get(TemplateId::extraction).body,
                    {{"schema", render_fields_schema(schema, selected)},
                     {"scenario_ids", joined},
                     {"ocr_text", fence_block(masked_text)}});
}

std::string build_baseline_prompt(const TemplateSet& templates, const Schema& schema,
                                  std::string_view masked_text) {
  std::vector<const ScenarioSpec*> all;
  for (const auto& s : schema.scenarios) all.push_back(&s);
  return substitute(templates.get(TemplateId::baseline).body,
                    {{"schema", render_fields_schema(schema, all)},
                     {"ocr_text", fence_block(masked_text)}});
}

std::vector<std::string> parse_classification_response(std::string_view response,
                                                       const Schema& schema,
                                                       std::vector<std::string>* warnings) {
  json j = fenced_json(response, "classification response");
  json ids_json;
  if (j.is_object() && j.contains("scenarios"))
    ids_json = j.at("scenarios");
  else if (j.is_array())
    ids_json = j;
  else
    throw parse_error("classification response: expected {\"scenarios\": [...]} in response:\n" +
                      std::string(response));

  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& item : ids_json) {
    if (!item.is_string()) {
      if (warnings) warnings->push_back("classification: non-string scenario id skipped");
      continue;
    }
    std::string id = item.get<std::string>();
    if (!seen.insert(id).second) continue;
    if (!schema.find_scenario(id)) {
      if (warnings) warnings->push_back("classification: unknown scenario id \"" + id + "\" dropped");
      continue;
    }
    ids.push_back(std::move(id));
  }
  if (ids.size() > 3) {
    if (warnings)
      warnings->push_back("classification: " + std::to_string(ids.size()) +
                          " scenarios returned, keeping the first 3");
    ids.resize(3);
  }
  return ids;
}

std::string parse_precorrection_response(std::string_view response) {
  auto block = find_fenced_block(response);
  if (!block)
    throw parse_error("precorrection response: no fenced block found in response:\n" +
                      std::string(response));
  return *block;
}

RawExtraction parse_extraction_response(std::string_view response, std::vector<std::string>* warnings) {
  json j = fenced_json(response, "extraction response");
  json records_json;
  if (j.is_object() && j.contains("records"))
    records_json = j.at("records");
  else if (j.is_array())
    records_json = j;
  else
    throw parse_error("extraction response: expected {\"records\": [...]} in response:\n" +
                      std::string(response));

  RawExtraction out;
  out.source = std::string(response);
  for (const auto& rj : records_json) {
    if (!rj.is_object()) {
      if (warnings) warnings->push_back("extraction: non-object record skipped");
      continue;
    }
    RawRecord r;
    r.scenario_id = rj.value("scenario_id", "");
    r.key = rj.value("key", "");
    if (rj.contains("value") && !rj.at("value").is_null()) {
      const auto& v = rj.at("value");
      r.value = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (rj.contains("unit") && !rj.at("unit").is_null()) r.unit = rj.at("unit").get<std::string>();
    if (trim(r.key).empty() || trim(r.scenario_id).empty()) {
      if (warnings)
        warnings->push_back("extraction: record missing key or scenario_id dropped: " + rj.dump());
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

std::string render_extraction_response(const std::vector<RawRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    json rj = json::object();
    rj["scenario_id"] = r.scenario_id;
    rj["key"] = r.key;
    rj["value"] = r.value;
    rj["unit"] = r.unit ? json(*r.unit) : json(nullptr);
    arr.push_back(std::move(rj));
  }
  json j = json::object();
  j["records"] = arr;
  return fence_block(j.dump(2));
}

std::string render_classification_response(const std::vector<std::string>& scenario_ids) {
  json j = json::object();
  j["scenarios"] = scenario_ids;
  return fence_block(j.dump());
}

}  // namespace medrex
