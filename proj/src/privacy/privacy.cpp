#include "privacy/privacy.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "common/errors.hpp"
#include "common/jsonio.hpp"
#include "common/strings.hpp"

namespace medrex {

namespace {

std::optional<EntityCategory> category_from_name(std::string_view name) {
  if (name == "person_name") return EntityCategory::person_name;
  if (name == "id_number") return EntityCategory::id_number;
  if (name == "phone") return EntityCategory::phone;
  if (name == "custom") return EntityCategory::custom;
  return std::nullopt;
}

class RuleBasedDetector : public EntityDetector {
 public:
  explicit RuleBasedDetector(DetectorConfig config) : config_(std::move(config)) {
    for (const auto& [category, pattern] : config_.patterns)
      regexes_.emplace_back(category, std::regex(pattern));
  }

  std::vector<SensitiveSpan> detect(std::string_view text) const override {
    std::vector<SensitiveSpan> spans;
    std::string subject(text);

    // Lexicon entries are exact substrings; longest first so "Zhang San"
    // beats "Zhang" when both are listed.
    std::vector<std::string> lexicon = config_.name_lexicon;
    std::sort(lexicon.begin(), lexicon.end(),
              [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    for (const auto& name : lexicon) {
      if (name.empty()) continue;
      size_t pos = 0;
      while ((pos = subject.find(name, pos)) != std::string::npos) {
        spans.push_back({pos, pos + name.size(), EntityCategory::person_name, name});
        pos += name.size();
      }
    }

    for (const auto& [category, re] : regexes_) {
      auto begin = std::cregex_iterator(subject.data(), subject.data() + subject.size(), re);
      for (auto it = begin; it != std::cregex_iterator(); ++it) {
        size_t start = static_cast<size_t>(it->position(0));
        size_t len = static_cast<size_t>(it->length(0));
        if (len == 0) continue;
        spans.push_back({start, start + len, category, subject.substr(start, len)});
      }
    }
    return normalize_spans(text, std::move(spans));
  }

 private:
  DetectorConfig config_;
  std::vector<std::pair<EntityCategory, std::regex>> regexes_;
};

}  // namespace

const char* entity_category_name(EntityCategory c) {
  switch (c) {
    case EntityCategory::person_name: return "person_name";
    case EntityCategory::id_number: return "id_number";
    case EntityCategory::phone: return "phone";
    case EntityCategory::custom: return "custom";
  }
  return "custom";
}

const char* entity_category_tag(EntityCategory c) {
  switch (c) {
    case EntityCategory::person_name: return "NAME";
    case EntityCategory::id_number: return "ID";
    case EntityCategory::phone: return "PHONE";
    case EntityCategory::custom: return "CUSTOM";
  }
  return "CUSTOM";
}

const MappingEntry* MappingTable::find(std::string_view placeholder) const {
  for (const auto& e : entries)
    if (e.placeholder == placeholder) return &e;
  return nullptr;
}

std::string serialize_mapping_table(const MappingTable& table) {
  json j = json::object();
  j["report_id"] = table.report_id;
  json entries = json::array();
  for (const auto& e : table.entries)
    entries.push_back({{"placeholder", e.placeholder},
                       {"category", entity_category_name(e.category)},
                       {"original", e.original}});
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

MappingTable parse_mapping_table(std::string_view text) {
  json j = parse_json(text, "mapping table");
  MappingTable table;
  table.report_id = j.value("report_id", "");
  if (j.contains("entries")) {
    for (const auto& ej : j.at("entries")) {
      auto category = category_from_name(ej.value("category", "custom"));
      if (!category) throw parse_error("mapping table: unknown category");
      table.entries.push_back(
          {ej.value("placeholder", ""), *category, ej.value("original", "")});
    }
  }
  return table;
}

DetectorConfig DetectorConfig::defaults() {
  DetectorConfig config;
  // Mobile numbers before bare digit runs so an 11-digit mobile is not
  // claimed by the id pattern.
  config.patterns = {
      {EntityCategory::phone, R"(1[3-9]\d{9})"},
      {EntityCategory::id_number, R"(\d{8,18}[Xx]?)"},
  };
  config.name_lexicon = {
      "张三", "李四", "王五", "赵六", "孙七", "周八", "吴九", "郑十",
      "Zhang San", "Li Si", "Wang Wu", "Zhao Liu", "Sun Qi", "Zhou Ba",
  };
  return config;
}

DetectorConfig DetectorConfig::from_json_text(std::string_view text) {
  json j = parse_json(text, "detector config");
  DetectorConfig config;
  if (j.contains("patterns")) {
    for (const auto& pj : j.at("patterns")) {
      auto category = category_from_name(pj.value("category", ""));
      if (!category)
        throw parse_error("detector config: unknown category \"" + pj.value("category", "") + "\"");
      config.patterns.emplace_back(*category, pj.value("regex", ""));
    }
  }
  if (j.contains("name_lexicon"))
    for (const auto& n : j.at("name_lexicon")) config.name_lexicon.push_back(n.get<std::string>());
  return config;
}

std::string DetectorConfig::to_json_text() const {
  json j = json::object();
  json patterns = json::array();
  for (const auto& [category, pattern] : this->patterns)
    patterns.push_back({{"category", entity_category_name(category)}, {"regex", pattern}});
  j["patterns"] = patterns;
  j["name_lexicon"] = name_lexicon;
  return j.dump(2) + "\n";
}

std::unique_ptr<EntityDetector> make_rule_based_detector(DetectorConfig config) {
  return std::make_unique<RuleBasedDetector>(std::move(config));
}

std::vector<SensitiveSpan> normalize_spans(std::string_view text, std::vector<SensitiveSpan> spans,
                                           std::vector<std::string>* warnings) {
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > text.size())
      throw usage_error("sensitive span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                        ") out of range for text of length " + std::to_string(text.size()));
    if (text.substr(s.start, s.end - s.start) != s.surface)
      throw usage_error("sensitive span surface does not match text at offset " +
                        std::to_string(s.start));
  }
  // Longer spans first so overlap resolution keeps them.
  std::stable_sort(spans.begin(), spans.end(), [](const SensitiveSpan& a, const SensitiveSpan& b) {
    return (a.end - a.start) > (b.end - b.start);
  });
  std::vector<SensitiveSpan> kept;
  for (auto& s : spans) {
    bool overlaps = false;
    for (const auto& k : kept) {
      if (s.start < k.end && k.start < s.end) {
        overlaps = true;
        if (warnings)
          warnings->push_back("overlapping span \"" + s.surface + "\" at " +
                              std::to_string(s.start) + " discarded in favor of \"" + k.surface +
                              "\"");
        break;
      }
    }
    if (!overlaps) kept.push_back(std::move(s));
  }
  std::sort(kept.begin(), kept.end(),
            [](const SensitiveSpan& a, const SensitiveSpan& b) { return a.start < b.start; });
  return kept;
}

MaskOutcome mask(std::string_view text, const std::vector<SensitiveSpan>& spans,
                 std::string report_id, const PlaceholderStyle& style) {
  MaskOutcome out;
  out.table.report_id = std::move(report_id);
  out.masked_text = std::string(text);
  if (spans.empty()) return out;

  auto sorted = normalize_spans(text, spans);

  // Placeholders are assigned in reading order, one per distinct
  // (category, surface); replacement happens longest-surface-first so a
  // surface that contains another is rewritten before its substring.
  std::map<std::pair<EntityCategory, std::string>, std::string> assigned;
  std::map<EntityCategory, int> counters;
  for (const auto& s : sorted) {
    auto key = std::make_pair(s.category, s.surface);
    if (assigned.count(key)) continue;
    std::string placeholder;
    do {
      int n = ++counters[s.category];
      placeholder =
          style.open + entity_category_tag(s.category) + "_" + std::to_string(n) + style.close;
    } while (text.find(placeholder) != std::string_view::npos);
    assigned.emplace(std::move(key), placeholder);
    out.table.entries.push_back({placeholder, s.category, s.surface});
  }

  std::vector<const MappingEntry*> by_length;
  for (const auto& e : out.table.entries) by_length.push_back(&e);
  std::stable_sort(by_length.begin(), by_length.end(), [](const MappingEntry* a, const MappingEntry* b) {
    return a->original.size() > b->original.size();
  });
  for (const MappingEntry* e : by_length)
    out.masked_text = replace_all(std::move(out.masked_text), e->original, e->placeholder);
  return out;
}

std::string restore(std::string_view text, const MappingTable& table,
                    std::vector<std::string>* warnings, const PlaceholderStyle& style) {
  std::string out(text);
  for (const auto& e : table.entries) out = replace_all(std::move(out), e.placeholder, e.original);

  if (warnings) {
    static const std::regex inner_re(R"([A-Z]+_\d+)");
    size_t pos = 0;
    std::string_view view(out);
    while ((pos = view.find(style.open, pos)) != std::string_view::npos) {
      size_t inner = pos + style.open.size();
      size_t close = view.find(style.close, inner);
      if (close == std::string_view::npos) break;
      std::string body(view.substr(inner, close - inner));
      if (std::regex_match(body, inner_re)) {
        std::string token(view.substr(pos, close + style.close.size() - pos));
        warnings->push_back("unknown placeholder " + token + " left intact");
      }
      pos = close + style.close.size();
    }
  }
  return out;
}

ExtractionResult restore_result(ExtractionResult result, const MappingTable& table) {
  for (auto& p : result.pairs) {
    switch (p.value.kind) {
      case ValueType::string:
      case ValueType::datetime:
      case ValueType::dictionary:
        p.value.text = restore(p.value.text, table);
        break;
      default:
        break;
    }
    if (!p.provenance.empty()) p.provenance = restore(p.provenance, table);
  }
  return result;
}

}  // namespace medrex
