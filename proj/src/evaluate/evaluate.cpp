#include "evaluate/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <regex>
#include <sstream>

#include "common/errors.hpp"
#include "common/jsonio.hpp"
#include "common/strings.hpp"

namespace medrex {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double a, double b) { return (a + b) == 0.0 ? 0.0 : 2.0 * a * b / (a + b); }

std::string normalized_string(std::string_view s) { return collapse_whitespace(nfc(s)); }

// Truncated prints like "2024-05-" or "2024-05"; the trailing day (or month)
// never made it onto the page. Boundaries are any non-digit so quoted
// provenance text still matches.
bool looks_truncated_date(std::string_view s) {
  static const std::regex re(R"((^|[^0-9])\d{4}[-/](\d{1,2}[-/]?)?($|[^0-9/-]))");
  std::string text(s);
  return std::regex_search(text, re);
}

}  // namespace

bool values_equal(const TypedValue& a, const TypedValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ValueType::integer:
      return a.integer == b.integer;
    case ValueType::floating: {
      if (a.real == b.real) return true;
      double scale = std::max(std::abs(a.real), std::abs(b.real));
      return std::abs(a.real - b.real) <= 1e-9 * scale;
    }
    case ValueType::string:
      return normalized_string(a.text) == normalized_string(b.text);
    case ValueType::datetime:
    case ValueType::dictionary:
      return a.text == b.text;
  }
  return false;
}

ConfusionBreakdown match_pairs(const ExtractionResult& gold, const ExtractionResult& predicted) {
  if (gold.report_id != predicted.report_id)
    throw usage_error("match_pairs: report ids differ (\"" + gold.report_id + "\" vs \"" +
                      predicted.report_id + "\")");

  ConfusionBreakdown out;
  std::map<std::pair<std::string, std::string>, const KeyValuePair*> gold_index;
  for (const auto& g : gold.pairs) gold_index[{g.scenario_id, g.field_key}] = &g;

  std::map<std::pair<std::string, std::string>, bool> matched;
  for (const auto& p : predicted.pairs) {
    auto it = gold_index.find({p.scenario_id, p.field_key});
    if (it == gold_index.end()) {
      out.key_fp.push_back(p);
      continue;
    }
    matched[it->first] = true;
    if (values_equal(it->second->value, p.value))
      out.corrects.push_back({*it->second, p});
    else
      out.value_mismatches.push_back({*it->second, p});
  }
  for (const auto& g : gold.pairs)
    if (!matched.count({g.scenario_id, g.field_key})) out.key_fn.push_back(g);
  return out;
}

MetricsReport compute_metrics(const MetricCounts& counts) {
  MetricsReport m;
  m.n_corrects = counts.corrects;
  m.tp_key = counts.corrects + counts.value_mismatches;
  m.fp_key = counts.key_fp;
  m.fn_key = counts.key_fn;

  if (m.tp_key == 0 && m.fp_key == 0 && m.fn_key == 0) {
    // Nothing to find and nothing found: perfect by convention.
    m.key_precision = m.key_recall = m.key_f1 = 1.0;
    m.accuracy = m.precision = m.recall = m.f1 = 1.0;
    return m;
  }

  m.key_precision = ratio(m.tp_key, m.tp_key + m.fp_key);
  m.key_recall = ratio(m.tp_key, m.tp_key + m.fn_key);
  m.key_f1 = harmonic(m.key_precision, m.key_recall);
  m.accuracy = ratio(m.n_corrects, m.tp_key);
  m.precision = m.key_precision * m.accuracy;
  m.recall = m.key_recall * m.accuracy;
  m.f1 = harmonic(m.precision, m.recall);
  return m;
}

MetricsReport compute_metrics(const ConfusionBreakdown& breakdown) {
  return compute_metrics(counts_of(breakdown));
}

MetricCounts counts_of(const ConfusionBreakdown& b) {
  return {b.n_corrects(), static_cast<std::int64_t>(b.value_mismatches.size()), b.fp_key(),
          b.fn_key()};
}

MetricsReport aggregate_counts(std::span<const MetricCounts> counts) {
  if (counts.empty()) throw usage_error("aggregate: no breakdowns given");
  MetricCounts total;
  for (const auto& c : counts) {
    total.corrects += c.corrects;
    total.value_mismatches += c.value_mismatches;
    total.key_fp += c.key_fp;
    total.key_fn += c.key_fn;
  }
  return compute_metrics(total);
}

MetricsReport aggregate(std::span<const ConfusionBreakdown> breakdowns) {
  std::vector<MetricCounts> counts;
  counts.reserve(breakdowns.size());
  for (const auto& b : breakdowns) counts.push_back(counts_of(b));
  return aggregate_counts(counts);
}

std::string value_to_display(const TypedValue& v) {
  switch (v.kind) {
    case ValueType::integer: return std::to_string(v.integer);
    case ValueType::floating: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v.real);
      double parsed = std::strtod(buf, nullptr);
      if (parsed == v.real) {
        // shorten when a lower precision already round-trips
        for (int prec = 1; prec <= 16; ++prec) {
          char shorter[64];
          std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v.real);
          if (std::strtod(shorter, nullptr) == v.real) return shorter;
        }
      }
      return buf;
    }
    default: return v.text;
  }
}

std::string metrics_csv_row(const MetricsReport& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f", m.key_precision * 100.0,
                m.key_recall * 100.0, m.key_f1 * 100.0, m.accuracy * 100.0, m.precision * 100.0,
                m.recall * 100.0, m.f1 * 100.0);
  return buf;
}

std::string metrics_to_json_text(const MetricsReport& m) {
  json j = json::object();
  j["n_corrects"] = m.n_corrects;
  j["tp_key"] = m.tp_key;
  j["fp_key"] = m.fp_key;
  j["fn_key"] = m.fn_key;
  j["key_precision"] = m.key_precision;
  j["key_recall"] = m.key_recall;
  j["key_f1"] = m.key_f1;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  return j.dump(2) + "\n";
}

ErrorReport error_report(const ConfusionBreakdown& breakdown) {
  ErrorReport report;
  for (const auto& mm : breakdown.value_mismatches) {
    ErrorCase c;
    c.category = "value-mismatch";
    c.scenario_id = mm.gold.scenario_id;
    c.field_key = mm.gold.field_key;
    c.gold_value = value_to_display(mm.gold.value);
    c.predicted_value = value_to_display(mm.predicted.value);
    c.provenance = mm.predicted.provenance;

    bool truncated = looks_truncated_date(c.provenance) || looks_truncated_date(c.gold_value) ||
                     looks_truncated_date(c.predicted_value);
    if (truncated)
      c.tag = "incomplete-date";
    else if (equal_ignoring_punctuation(c.gold_value, c.predicted_value))
      c.tag = "punctuation-only";
    else
      c.tag = "other";
    report.cases.push_back(std::move(c));
  }
  for (const auto& p : breakdown.key_fp) {
    report.cases.push_back({"key-fp", "key match problem", p.scenario_id, p.field_key, "",
                            value_to_display(p.value), p.provenance});
  }
  for (const auto& g : breakdown.key_fn) {
    report.cases.push_back({"key-fn", "key match problem", g.scenario_id, g.field_key,
                            value_to_display(g.value), "", g.provenance});
  }
  return report;
}

std::string error_report_to_json_text(const ErrorReport& report) {
  json arr = json::array();
  for (const auto& c : report.cases) {
    json j = json::object();
    j["category"] = c.category;
    j["tag"] = c.tag;
    j["scenario_id"] = c.scenario_id;
    j["key"] = c.field_key;
    j["gold"] = c.gold_value;
    j["predicted"] = c.predicted_value;
    j["provenance"] = c.provenance;
    arr.push_back(std::move(j));
  }
  json root = json::object();
  root["cases"] = arr;
  return root.dump(2) + "\n";
}

std::string error_report_to_text(const ErrorReport& report) {
  std::ostringstream out;
  const char* categories[] = {"value-mismatch", "key-fp", "key-fn"};
  for (const char* category : categories) {
    size_t n = 0;
    for (const auto& c : report.cases)
      if (c.category == category) ++n;
    out << category << " (" << n << ")\n";
    for (const auto& c : report.cases) {
      if (c.category != category) continue;
      out << "  [" << c.tag << "] " << c.scenario_id << "/" << c.field_key << ": gold=\""
          << c.gold_value << "\" predicted=\"" << c.predicted_value << "\"";
      if (!c.provenance.empty()) out << " from " << c.provenance;
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace medrex
