#pragma once

#include <string>
#include <string_view>

#include "normalize/records.hpp"
#include "prompt/prompt.hpp"
#include "schema/schema.hpp"

namespace medrex {

// Thrown by the single-record standardization steps; normalize_extraction
// converts them into per-record warnings instead of failing the report.
class NormalizeError : public Error {
 public:
  explicit NormalizeError(std::string message) : Error(ErrorKind::validation, std::move(message)) {}
};

// value (in source_unit) -> value in the field's canonical unit. The canonical
// unit itself is the identity; anything outside the conversion table raises a
// NormalizeError naming both units.
double convert_unit(double value, std::string_view source_unit, const FieldSpec& spec);

// Exact-match lookup after trimming; canonical labels map to themselves.
std::string map_option(std::string_view raw, const FieldSpec& spec);

// Raw token -> TypedValue per spec.value_type. Datetime accepts
// YYYY-MM-DD[ HH:MM[:SS]], YYYY/MM/DD and YYYY年MM月DD日; incomplete dates are
// rejected, never auto-completed.
TypedValue coerce_type(std::string_view raw, const FieldSpec& spec);

// Re-applies field-name standardization, unit conversion, option mapping and
// type coercion to every record. Total: failures become warnings carrying the
// offending record, duplicates collapse to the first occurrence.
ExtractionResult normalize_extraction(const RawExtraction& raw, const Schema& schema,
                                      const std::string& report_id);

}  // namespace medrex
