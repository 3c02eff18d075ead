#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace medrex {

struct OcrSegment {
  std::string text;
  std::array<double, 4> bbox{};  // x0, y0, x1, y1; origin top-left, pixels
  double confidence = 1.0;
};

struct OcrDocument {
  std::string report_id;
  double page_width = 0;
  double page_height = 0;
  std::vector<OcrSegment> segments;
  std::optional<std::string> source_image_ref;
};

// Throws parse_error naming the offending segment index on malformed input,
// validation_error on invariant violations (inverted or out-of-bounds bbox,
// empty text, bad confidence).
OcrDocument parse_ocr_document(std::string_view text);
OcrDocument parse_ocr_document_file(const std::string& path);

std::string serialize_ocr_document(const OcrDocument& doc);

// Stitches segments into reading-order text. Two segments share a line when
// their vertical intervals overlap by at least `line_overlap_ratio` of the
// shorter interval's height (closed transitively). Lines are ordered by group
// top y (ties: min x0, then joined text); segments within a line by x0 and
// joined with single spaces. Output does not depend on segment order.
std::string reconstruct_text(const OcrDocument& doc, double line_overlap_ratio = 0.5);

// Best-effort conversion of hOCR-style HTML (ocr_page / ocrx_word spans with
// bbox and x_wconf annotations) into an OcrDocument.
OcrDocument from_hocr(std::string_view html, std::string report_id);

}  // namespace medrex
