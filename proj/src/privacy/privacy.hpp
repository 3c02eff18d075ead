#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "normalize/records.hpp"

namespace medrex {

enum class EntityCategory { person_name, id_number, phone, custom };

const char* entity_category_name(EntityCategory c);
// Tag used inside placeholders: NAME, ID, PHONE, CUSTOM.
const char* entity_category_tag(EntityCategory c);

struct SensitiveSpan {
  size_t start = 0;
  size_t end = 0;  // exclusive
  EntityCategory category = EntityCategory::custom;
  std::string surface;

  bool operator==(const SensitiveSpan&) const = default;
};

struct MappingEntry {
  std::string placeholder;
  EntityCategory category;
  std::string original;
};

struct MappingTable {
  std::string report_id;
  std::vector<MappingEntry> entries;  // insertion (reading) order

  const MappingEntry* find(std::string_view placeholder) const;
  bool empty() const { return entries.empty(); }
};

std::string serialize_mapping_table(const MappingTable& table);
MappingTable parse_mapping_table(std::string_view text);

class EntityDetector {
 public:
  virtual ~EntityDetector() = default;
  virtual std::vector<SensitiveSpan> detect(std::string_view text) const = 0;
};

struct DetectorConfig {
  // category/pattern pairs, evaluated in order. Earlier patterns win ties.
  std::vector<std::pair<EntityCategory, std::string>> patterns;
  std::vector<std::string> name_lexicon;

  static DetectorConfig defaults();
  static DetectorConfig from_json_text(std::string_view text);
  std::string to_json_text() const;
};

// Regex patterns plus exact lexicon matching; no trained model involved.
std::unique_ptr<EntityDetector> make_rule_based_detector(DetectorConfig config);

// Sorts spans, validates offsets against the text, and resolves overlaps by
// keeping the longer span (warning recorded per discarded span).
std::vector<SensitiveSpan> normalize_spans(std::string_view text, std::vector<SensitiveSpan> spans,
                                           std::vector<std::string>* warnings = nullptr);

struct MaskOutcome {
  std::string masked_text;
  MappingTable table;
};

// Placeholder delimiters. The defaults are white corner brackets, which never
// occur in lab reports and survive model echo unmangled.
struct PlaceholderStyle {
  std::string open = "⟦";   // ⟦
  std::string close = "⟧";  // ⟧
};

// Every span surface is replaced by a category-tagged placeholder; every
// occurrence of the surface is replaced so the masked text never leaks it.
MaskOutcome mask(std::string_view text, const std::vector<SensitiveSpan>& spans,
                 std::string report_id = "", const PlaceholderStyle& style = {});

// Replaces known placeholders with their originals; unknown placeholder-shaped
// tokens are left intact and reported through `warnings`.
std::string restore(std::string_view text, const MappingTable& table,
                    std::vector<std::string>* warnings = nullptr,
                    const PlaceholderStyle& style = {});

// Applies restore to every string-typed value; numeric values untouched.
ExtractionResult restore_result(ExtractionResult result, const MappingTable& table);

}  // namespace medrex
