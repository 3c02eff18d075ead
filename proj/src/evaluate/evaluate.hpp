#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "normalize/records.hpp"

namespace medrex {

struct MatchedPair {
  KeyValuePair gold;
  KeyValuePair predicted;
};

// The four case lists partition the union of gold and predicted pairs under
// exact (scenario_id, field_key) matching.
struct ConfusionBreakdown {
  std::vector<MatchedPair> corrects;
  std::vector<MatchedPair> value_mismatches;
  std::vector<KeyValuePair> key_fp;  // predicted without gold counterpart
  std::vector<KeyValuePair> key_fn;  // gold without predicted counterpart

  std::int64_t n_corrects() const { return static_cast<std::int64_t>(corrects.size()); }
  std::int64_t tp_key() const {
    return static_cast<std::int64_t>(corrects.size() + value_mismatches.size());
  }
  std::int64_t fp_key() const { return static_cast<std::int64_t>(key_fp.size()); }
  std::int64_t fn_key() const { return static_cast<std::int64_t>(key_fn.size()); }
};

struct MetricCounts {
  std::int64_t corrects = 0;
  std::int64_t value_mismatches = 0;
  std::int64_t key_fp = 0;
  std::int64_t key_fn = 0;
};

struct MetricsReport {
  std::int64_t n_corrects = 0;
  std::int64_t tp_key = 0;
  std::int64_t fp_key = 0;
  std::int64_t fn_key = 0;
  double key_precision = 0;
  double key_recall = 0;
  double key_f1 = 0;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Type-aware value equality: floats within relative 1e-9, strings after NFC
// plus whitespace collapse (punctuation differences stay significant),
// datetimes and options on their normalized forms.
bool values_equal(const TypedValue& a, const TypedValue& b);

// Exact key matching on (scenario_id, field_key); throws usage_error when the
// two results carry different report ids.
ConfusionBreakdown match_pairs(const ExtractionResult& gold, const ExtractionResult& predicted);

// tp = corrects + mismatches; key_p = tp/(tp+fp); key_r = tp/(tp+fn);
// acc = corrects/tp; p = key_p*acc; r = key_r*acc; f1s harmonic. Zero
// denominators yield 0, except the all-empty breakdown where every metric is 1.
MetricsReport compute_metrics(const MetricCounts& counts);
MetricsReport compute_metrics(const ConfusionBreakdown& breakdown);

// Micro-aggregation: counts summed across reports, metrics computed once.
MetricsReport aggregate(std::span<const ConfusionBreakdown> breakdowns);
MetricsReport aggregate_counts(std::span<const MetricCounts> counts);

MetricCounts counts_of(const ConfusionBreakdown& b);

// "key_p,key_r,key_f1,acc,p,r,f1" in percent, one decimal.
std::string metrics_csv_row(const MetricsReport& m);
std::string metrics_to_json_text(const MetricsReport& m);

// Error categorization: value mismatches sub-tagged incomplete-date /
// punctuation-only / other; key_fp and key_fn tagged "key match problem".
struct ErrorCase {
  std::string category;  // value-mismatch | key-fp | key-fn
  std::string tag;
  std::string scenario_id;
  std::string field_key;
  std::string gold_value;
  std::string predicted_value;
  std::string provenance;
};

struct ErrorReport {
  std::vector<ErrorCase> cases;
};

ErrorReport error_report(const ConfusionBreakdown& breakdown);
std::string error_report_to_json_text(const ErrorReport& report);
std::string error_report_to_text(const ErrorReport& report);

std::string value_to_display(const TypedValue& v);

}  // namespace medrex
