#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "common/jsonio.hpp"
#include "gateway/gateway.hpp"
#include "schema/schema.hpp"

namespace medrex {

struct ErrorRates {
  double value_error_rate = 0.0;
  double key_drop_rate = 0.0;
  double key_extra_rate = 0.0;
};

// Seeded synthetic corpus: OCR documents laid out on a bbox grid, gold
// annotations, page images, and per-cell cassettes whose scripted responses
// embody the configured error rates. Injected error counts land in the
// manifest so expected metrics are computable before running anything.
struct CorpusSpec {
  int report_count = 20;
  std::pair<int, int> scenarios_per_report{1, 3};
  std::pair<int, int> fields_per_scenario{6, 10};
  std::pair<int, int> general_fields_per_report{2, 4};
  ErrorRates chatschema;            // rates for the two-stage method
  ErrorRates baseline{0.25, 0.10, 0.08};
  double ocr_char_confusion_rate = 0.05;
  double raw_variant_rate = 0.3;    // responses using alias / source unit / raw option forms
  std::uint64_t seed = 7;
  double line_overlap_ratio = 0.5;
  ProviderConfig provider;

  static CorpusSpec from_json_text(std::string_view text);
};

// Writes reports/, gold/, images/, cassettes/ and manifest.json under out_dir.
// Returns the manifest. Same spec + schema -> byte-identical corpus.
json generate_corpus(const CorpusSpec& spec, const Schema& schema,
                     const std::filesystem::path& out_dir);

}  // namespace medrex
