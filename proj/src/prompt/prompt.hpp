#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schema/schema.hpp"

namespace medrex {

enum class TemplateId { precorrection, classification, extraction, baseline };

const char* template_id_name(TemplateId id);

struct PromptTemplate {
  TemplateId id = TemplateId::precorrection;
  std::string body;
  std::vector<std::string> required_placeholders;
};

// The four templates, validated so each body contains every required
// placeholder exactly once. Defaults ship in-repo under templates/ and are
// compiled in; load_dir() hot-swaps them between batches.
class TemplateSet {
 public:
  static TemplateSet defaults();
  static TemplateSet load_dir(const std::string& dir);

  const PromptTemplate& get(TemplateId id) const;

 private:
  std::vector<PromptTemplate> templates_;
};

// One record as emitted by the model, before normalization.
struct RawRecord {
  std::string scenario_id;
  std::string key;
  std::string value;
  std::optional<std::string> unit;

  bool operator==(const RawRecord&) const = default;
};

struct RawExtraction {
  std::vector<RawRecord> records;
  std::string source;  // verbatim model response
};

// Fenced-block helpers. The opening fence is always longer than any backtick
// run inside the content, so rendering then parsing round-trips (modulo one
// trailing newline, which the line-based fence format cannot represent).
std::string fence_block(std::string_view content);
std::optional<std::string> find_fenced_block(std::string_view text);

std::string build_precorrection_prompt(const TemplateSet& templates, std::string_view raw_ocr_text);
std::string build_classification_prompt(const TemplateSet& templates, const Schema& schema,
                                        std::string_view masked_text);
std::string build_extraction_prompt(const TemplateSet& templates, const Schema& schema,
                                    const std::vector<std::string>& scenario_ids,
                                    std::string_view masked_text);
std::string build_baseline_prompt(const TemplateSet& templates, const Schema& schema,
                                  std::string_view masked_text);

// Ids from the first fenced block: deduplicated, order kept, unknown ids
// dropped with a warning, clamped to at most three.
std::vector<std::string> parse_classification_response(std::string_view response,
                                                       const Schema& schema,
                                                       std::vector<std::string>* warnings = nullptr);

// Corrected text from a precorrection response (the first fenced block).
std::string parse_precorrection_response(std::string_view response);

RawExtraction parse_extraction_response(std::string_view response,
                                        std::vector<std::string>* warnings = nullptr);

// Inverse of parse_extraction_response for well-formed record lists; used by
// mocks and the corpus generator.
std::string render_extraction_response(const std::vector<RawRecord>& records);
std::string render_classification_response(const std::vector<std::string>& scenario_ids);

}  // namespace medrex
