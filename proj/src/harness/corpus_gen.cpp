#include "harness/corpus_gen.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "common/strings.hpp"
#include "evaluate/evaluate.hpp"
#include "harness/harness.hpp"
#include "normalize/normalize.hpp"
#include "ocr/ocr.hpp"
#include "privacy/privacy.hpp"
#include "prompt/prompt.hpp"

namespace medrex {

namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

int uniform_in(Rng& rng, std::pair<int, int> range) {
  if (range.first > range.second) std::swap(range.first, range.second);
  std::uniform_int_distribution<int> dist(range.first, range.second);
  return dist(rng);
}

double chance(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& pool) {
  std::uniform_int_distribution<size_t> dist(0, pool.size() - 1);
  return pool[dist(rng)];
}

std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n, k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

const std::vector<std::string> kDepartments = {"内科", "外科", "呼吸科", "肾内科", "血液科",
                                               "消化科", "心内科", "内分泌科"};
const std::vector<std::string> kDoctors = {"刘医生", "陈医生", "杨医生", "黄医生", "周医生"};
const std::vector<std::string> kGenericStrings = {"阴性对照正常", "复查", "标本合格", "已审核",
                                                  "无特殊", "急诊"};
const std::vector<std::string> kSampleTypes = {"血清", "全血", "尿液", "血浆"};

std::string random_digits(Rng& rng, int n) {
  std::string out;
  std::uniform_int_distribution<int> digit(0, 9);
  for (int i = 0; i < n; ++i) out.push_back(static_cast<char>('0' + digit(rng)));
  return out;
}

// One sampled field instance: the gold value plus the surface forms the
// scripted "model" will answer with.
struct GenPair {
  std::string scenario_id;
  const FieldSpec* spec = nullptr;
  TypedValue gold;
  std::string key_surface;
  std::string value_surface;
  std::optional<std::string> unit_surface;
  bool value_error_eligible = true;
};

struct GenReport {
  std::string id;
  std::vector<std::string> scenario_ids;
  std::vector<GenPair> pairs;
  OcrDocument clean_doc;
  OcrDocument noisy_doc;
  std::string clean_recon;
  std::string masked_text;
  MappingTable table;
  std::vector<std::uint8_t> image_bytes;
};

std::vector<std::string> distinct_labels(const FieldSpec& spec) {
  std::vector<std::string> labels;
  if (!spec.options) return labels;
  for (const auto& [raw, canonical] : *spec.options)
    if (std::find(labels.begin(), labels.end(), canonical) == labels.end())
      labels.push_back(canonical);
  return labels;
}

std::string format_iso_date(int y, int mo, int d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, mo, d);
  return buf;
}

// Fills gold + surfaces for one field. `variant` asks for a non-canonical
// surface (alias, source unit, raw option token, alternate date format).
GenPair realize_field(Rng& rng, const std::string& scenario_id, const FieldSpec& spec,
                      const DetectorConfig& detector, bool variant) {
  GenPair pair;
  pair.scenario_id = scenario_id;
  pair.spec = &spec;
  pair.key_surface = (variant && !spec.aliases.empty()) ? pick(rng, spec.aliases) : spec.key;
  if (spec.canonical_unit) pair.unit_surface = *spec.canonical_unit;

  std::string folded_key = fold_name(spec.key);
  switch (spec.value_type) {
    case ValueType::integer: {
      std::int64_t v = uniform_in(rng, {1, 400});
      pair.gold = TypedValue::of_integer(v);
      pair.value_surface = std::to_string(v);
      break;
    }
    case ValueType::floating: {
      std::vector<std::pair<std::string, double>> sources;
      for (const auto& conv : spec.unit_conversions)
        if (!spec.canonical_unit || conv.first != *spec.canonical_unit) sources.push_back(conv);
      if (variant && !sources.empty()) {
        const auto& [unit, factor] = pick(rng, sources);
        std::int64_t sv = uniform_in(rng, {1, 40});
        pair.gold = TypedValue::of_float(static_cast<double>(sv) * factor);
        pair.value_surface = std::to_string(sv);
        pair.unit_surface = unit;
      } else {
        double v = static_cast<double>(uniform_in(rng, {1, 3999})) / 10.0;
        pair.gold = TypedValue::of_float(v);
        pair.value_surface = value_to_display(pair.gold);
      }
      break;
    }
    case ValueType::datetime: {
      int y = uniform_in(rng, {2023, 2025});
      int mo = uniform_in(rng, {1, 12});
      int d = uniform_in(rng, {1, 28});
      bool with_time = chance(rng) < 0.5;
      if (with_time) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, mo, d,
                      uniform_in(rng, {0, 23}), uniform_in(rng, {0, 59}), uniform_in(rng, {0, 59}));
        pair.gold = TypedValue::of_datetime(buf);
        pair.value_surface = std::string(buf);
        pair.value_surface[10] = ' ';  // the page prints a space, not a T
      } else {
        std::string iso = format_iso_date(y, mo, d);
        pair.gold = TypedValue::of_datetime(iso);
        if (variant) {
          char buf[32];
          if (chance(rng) < 0.5)
            std::snprintf(buf, sizeof(buf), "%04d/%02d/%02d", y, mo, d);
          else
            std::snprintf(buf, sizeof(buf), "%04d年%02d月%02d日", y, mo, d);
          pair.value_surface = buf;
        } else {
          pair.value_surface = iso;
        }
      }
      break;
    }
    case ValueType::dictionary: {
      auto labels = distinct_labels(spec);
      const std::string& label = pick(rng, labels);
      pair.gold = TypedValue::of_option(label);
      pair.value_error_eligible = labels.size() >= 2;
      if (variant) {
        std::vector<std::string> raws;
        for (const auto& [raw, canonical] : *spec.options)
          if (canonical == label) raws.push_back(raw);
        pair.value_surface = raws.empty() ? label : pick(rng, raws);
      } else {
        pair.value_surface = label;
      }
      break;
    }
    case ValueType::string: {
      std::string v;
      if (folded_key.find("name") != std::string::npos && !detector.name_lexicon.empty() &&
          folded_key.find("hospital") == std::string::npos)
        v = pick(rng, detector.name_lexicon);
      else if (folded_key.find("record no") != std::string::npos ||
               folded_key.find("病案") != std::string::npos || folded_key == "barcode")
        v = "0" + random_digits(rng, 7);
      else if (folded_key.find("phone") != std::string::npos)
        v = "13" + std::to_string(uniform_in(rng, {0, 9})) + random_digits(rng, 8);
      else if (folded_key.find("department") != std::string::npos)
        v = pick(rng, kDepartments);
      else if (folded_key.find("doctor") != std::string::npos ||
               folded_key.find("reviewer") != std::string::npos)
        v = pick(rng, kDoctors);
      else if (folded_key.find("sample") != std::string::npos)
        v = pick(rng, kSampleTypes);
      else if (folded_key.find("hospital") != std::string::npos)
        v = "市第一医院";
      else
        v = pick(rng, kGenericStrings);
      pair.gold = TypedValue::of_string(v);
      pair.value_surface = v;
      break;
    }
  }
  return pair;
}

// Lays out "key: value unit" rows on a tabular grid.
void layout_document(GenReport& report, std::uint64_t image_seed) {
  constexpr double kRow = 26.0;
  constexpr double kCharW = 7.0;
  std::vector<OcrSegment> segments;
  double y = 20.0;

  auto emit = [&](double x, const std::string& text) {
    OcrSegment seg;
    seg.text = text;
    double w = std::max<double>(10.0, kCharW * static_cast<double>(text.size()));
    seg.bbox = {x, y, x + w, y + 18.0};
    seg.confidence = 0.98;
    segments.push_back(std::move(seg));
  };

  emit(360, "检验报告单");
  y += kRow * 1.5;
  for (const auto& pair : report.pairs) {
    if (pair.scenario_id != kGeneralScope) continue;
    emit(30, pair.key_surface + ":");
    emit(330, pair.value_surface);
    y += kRow;
  }
  for (const auto& id : report.scenario_ids) {
    emit(30, "[" + id + "]");
    y += kRow;
    for (const auto& pair : report.pairs) {
      if (pair.scenario_id != id) continue;
      emit(50, pair.key_surface);
      emit(430, pair.value_surface);
      if (pair.unit_surface) emit(620, *pair.unit_surface);
      y += kRow;
    }
  }

  report.clean_doc.report_id = report.id;
  report.clean_doc.page_width = 1000.0;
  report.clean_doc.page_height = y + 40.0;
  report.clean_doc.segments = std::move(segments);
  report.clean_doc.source_image_ref = "images/" + report.id + ".png";
  report.image_bytes = render_placeholder_image(500, static_cast<int>(report.clean_doc.page_height / 2),
                                                image_seed);
}

const std::vector<std::pair<char, char>> kConfusions = {
    {'l', '1'}, {'1', 'l'}, {'O', '0'}, {'0', 'O'}, {'S', '5'}, {'5', 'S'}, {'B', '8'}};

OcrDocument corrupt_document(Rng& rng, const OcrDocument& clean, double rate) {
  OcrDocument noisy = clean;
  for (auto& seg : noisy.segments) {
    if (chance(rng) >= rate) continue;
    for (const auto& [from, to] : kConfusions) {
      size_t pos = seg.text.find(from);
      if (pos != std::string::npos) {
        seg.text[pos] = to;
        break;
      }
    }
  }
  return noisy;
}

std::string apply_mapping(std::string text, const MappingTable& table) {
  std::vector<const MappingEntry*> entries;
  for (const auto& e : table.entries) entries.push_back(&e);
  std::stable_sort(entries.begin(), entries.end(), [](const MappingEntry* a, const MappingEntry* b) {
    return a->original.size() > b->original.size();
  });
  for (const MappingEntry* e : entries) text = replace_all(std::move(text), e->original, e->placeholder);
  return text;
}

std::string perturb_value(const GenPair& pair) {
  const TypedValue& v = pair.gold;
  switch (v.kind) {
    case ValueType::integer:
      return std::to_string(v.integer + 1);
    case ValueType::floating:
      return value_to_display(TypedValue::of_float(v.real + 1.5));
    case ValueType::string:
      return v.text + " X";
    case ValueType::datetime: {
      std::string iso = v.text;
      int day = std::stoi(iso.substr(8, 2));
      day += (day < 28) ? 1 : -1;
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%02d", day);
      iso[8] = buf[0];
      iso[9] = buf[1];
      return iso;
    }
    case ValueType::dictionary: {
      auto labels = distinct_labels(*pair.spec);
      for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == v.text) return labels[(i + 1) % labels.size()];
      }
      return labels.empty() ? v.text : labels.front();
    }
  }
  return v.text;
}

struct MethodPlan {
  Method method = Method::chatschema;
  ErrorRates rates;
  std::vector<std::set<size_t>> value_errors;  // per report, indices into pairs
  std::vector<std::set<size_t>> drops;
  std::vector<std::vector<GenPair>> extras;
  std::int64_t injected_values = 0;
  std::int64_t injected_drops = 0;
  std::int64_t injected_extras = 0;
};

MethodPlan build_plan(Method method, const ErrorRates& rates, std::vector<GenReport>& reports,
                      const Schema& schema, const DetectorConfig& detector, std::uint64_t seed) {
  MethodPlan plan;
  plan.method = method;
  plan.rates = rates;
  plan.value_errors.resize(reports.size());
  plan.drops.resize(reports.size());
  plan.extras.resize(reports.size());

  Rng rng(seed ^ (method == Method::chatschema ? 0x636861746353ULL : 0x62617365ULL));

  std::vector<std::pair<size_t, size_t>> all;  // (report, pair)
  for (size_t r = 0; r < reports.size(); ++r)
    for (size_t p = 0; p < reports[r].pairs.size(); ++p) all.emplace_back(r, p);
  std::int64_t total = static_cast<std::int64_t>(all.size());

  std::int64_t want_values = std::llround(rates.value_error_rate * static_cast<double>(total));
  std::int64_t want_drops = std::llround(rates.key_drop_rate * static_cast<double>(total));
  std::int64_t want_extras = std::llround(rates.key_extra_rate * static_cast<double>(total));

  std::shuffle(all.begin(), all.end(), rng);
  std::set<std::pair<size_t, size_t>> used;
  for (const auto& [r, p] : all) {
    if (plan.injected_values >= want_values) break;
    if (!reports[r].pairs[p].value_error_eligible) continue;
    plan.value_errors[r].insert(p);
    used.insert({r, p});
    ++plan.injected_values;
  }
  for (const auto& [r, p] : all) {
    if (plan.injected_drops >= want_drops) break;
    if (used.count({r, p})) continue;
    plan.drops[r].insert(p);
    used.insert({r, p});
    ++plan.injected_drops;
  }

  // Extra-key candidates: schema fields of the report's scenarios (plus
  // general fields) that the gold set does not contain.
  struct Candidate {
    size_t report;
    std::string scenario_id;
    const FieldSpec* spec;
  };
  std::vector<Candidate> candidates;
  for (size_t r = 0; r < reports.size(); ++r) {
    std::set<std::pair<std::string, std::string>> present;
    for (const auto& pair : reports[r].pairs) present.insert({pair.scenario_id, pair.spec->key});
    for (const auto& id : reports[r].scenario_ids) {
      const ScenarioSpec* s = schema.find_scenario(id);
      for (const auto& f : s->fields)
        if (!present.count({id, f.key})) candidates.push_back({r, id, &f});
    }
    for (const auto& f : schema.general_fields)
      if (!present.count({kGeneralScope, f.key})) candidates.push_back({r, kGeneralScope, &f});
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (const auto& c : candidates) {
    if (plan.injected_extras >= want_extras) break;
    plan.extras[c.report].push_back(realize_field(rng, c.scenario_id, *c.spec, detector, false));
    ++plan.injected_extras;
  }
  return plan;
}

// Records the scripted model answers for one report under one method plan.
std::vector<RawRecord> build_records(const GenReport& report, const MethodPlan& plan, size_t r,
                                     const MappingTable& table) {
  std::vector<RawRecord> records;
  for (size_t p = 0; p < report.pairs.size(); ++p) {
    if (plan.drops[r].count(p)) continue;
    const GenPair& pair = report.pairs[p];
    RawRecord record;
    record.scenario_id = pair.scenario_id;
    if (plan.value_errors[r].count(p)) {
      record.key = pair.spec->key;
      record.value = apply_mapping(perturb_value(pair), table);
      if (pair.spec->canonical_unit) record.unit = *pair.spec->canonical_unit;
    } else {
      record.key = pair.key_surface;
      record.value = apply_mapping(pair.value_surface, table);
      record.unit = pair.unit_surface;
    }
    records.push_back(std::move(record));
  }
  for (const auto& extra : plan.extras[r]) {
    RawRecord record;
    record.scenario_id = extra.scenario_id;
    record.key = extra.spec->key;
    record.value = apply_mapping(extra.value_surface, table);
    record.unit = extra.unit_surface;
    records.push_back(std::move(record));
  }
  return records;
}

json expected_json(const MethodPlan& plan, std::int64_t gold_pairs) {
  MetricCounts counts;
  counts.corrects = gold_pairs - plan.injected_values - plan.injected_drops;
  counts.value_mismatches = plan.injected_values;
  counts.key_fn = plan.injected_drops;
  counts.key_fp = plan.injected_extras;
  MetricsReport m = compute_metrics(counts);

  json j = json::object();
  j["rates"] = {{"value_error_rate", plan.rates.value_error_rate},
                {"key_drop_rate", plan.rates.key_drop_rate},
                {"key_extra_rate", plan.rates.key_extra_rate}};
  j["injected"] = {{"value_errors", plan.injected_values},
                   {"dropped_keys", plan.injected_drops},
                   {"extra_keys", plan.injected_extras}};
  j["expected"] = parse_json(metrics_to_json_text(m), "metrics");
  return j;
}

}  // namespace

CorpusSpec CorpusSpec::from_json_text(std::string_view text) {
  json j = parse_json(text, "corpus spec");
  CorpusSpec spec;
  spec.provider.kind = "mock";
  spec.provider.model = "scripted";

  auto range = [&](const char* key, std::pair<int, int> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number_integer()) return std::pair<int, int>{v.get<int>(), v.get<int>()};
    return std::pair<int, int>{v.at(0).get<int>(), v.at(1).get<int>()};
  };

  spec.report_count = j.value("report_count", spec.report_count);
  spec.scenarios_per_report = range("scenarios_per_report", spec.scenarios_per_report);
  spec.fields_per_scenario = range("fields_per_scenario", spec.fields_per_scenario);
  spec.general_fields_per_report = range("general_fields_per_report", spec.general_fields_per_report);
  spec.chatschema.value_error_rate = j.value("value_error_rate", 0.0);
  spec.chatschema.key_drop_rate = j.value("key_drop_rate", 0.0);
  spec.chatschema.key_extra_rate = j.value("key_extra_rate", 0.0);
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    spec.baseline.value_error_rate = b.value("value_error_rate", spec.baseline.value_error_rate);
    spec.baseline.key_drop_rate = b.value("key_drop_rate", spec.baseline.key_drop_rate);
    spec.baseline.key_extra_rate = b.value("key_extra_rate", spec.baseline.key_extra_rate);
  }
  spec.ocr_char_confusion_rate = j.value("ocr_char_confusion_rate", spec.ocr_char_confusion_rate);
  spec.raw_variant_rate = j.value("raw_variant_rate", spec.raw_variant_rate);
  spec.seed = j.value("seed", spec.seed);
  spec.line_overlap_ratio = j.value("line_overlap_ratio", spec.line_overlap_ratio);
  if (j.contains("provider")) spec.provider = ProviderConfig::from_json(j.at("provider"));

  for (double rate : {spec.chatschema.value_error_rate, spec.chatschema.key_drop_rate,
                      spec.chatschema.key_extra_rate, spec.baseline.value_error_rate,
                      spec.baseline.key_drop_rate, spec.baseline.key_extra_rate,
                      spec.ocr_char_confusion_rate, spec.raw_variant_rate})
    if (rate < 0.0 || rate > 1.0) throw config_error("corpus spec: rates must lie in [0,1]");
  if (spec.report_count <= 0) throw config_error("corpus spec: report_count must be positive");
  return spec;
}

json generate_corpus(const CorpusSpec& spec, const Schema& schema, const fs::path& out_dir) {
  if (schema.scenarios.empty()) throw usage_error("corpus generation needs a schema with scenarios");
  DetectorConfig detector = DetectorConfig::defaults();
  auto rule_detector = make_rule_based_detector(detector);
  TemplateSet templates = TemplateSet::defaults();
  Rng rng(spec.seed);

  // ---- sample reports ----
  std::vector<GenReport> reports(static_cast<size_t>(spec.report_count));
  for (size_t i = 0; i < reports.size(); ++i) {
    GenReport& report = reports[i];
    char buf[16];
    std::snprintf(buf, sizeof(buf), "r%03zu", i);
    report.id = buf;

    int scenario_count = std::min<int>(uniform_in(rng, spec.scenarios_per_report),
                                       static_cast<int>(schema.scenarios.size()));
    for (size_t idx : sample_indices(rng, schema.scenarios.size(), static_cast<size_t>(scenario_count)))
      report.scenario_ids.push_back(schema.scenarios[idx].id);

    // Mandatory identity fields first so the privacy path is always exercised.
    std::vector<size_t> general_idx;
    int general_count = std::min<int>(uniform_in(rng, spec.general_fields_per_report),
                                      static_cast<int>(schema.general_fields.size()));
    std::vector<size_t> mandatory;
    for (size_t g = 0; g < schema.general_fields.size(); ++g) {
      std::string folded = fold_name(schema.general_fields[g].key);
      if (folded.find("patient name") != std::string::npos ||
          folded.find("record no") != std::string::npos)
        mandatory.push_back(g);
    }
    for (size_t g : mandatory)
      if (static_cast<int>(general_idx.size()) < general_count) general_idx.push_back(g);
    if (static_cast<int>(general_idx.size()) < general_count) {
      for (size_t g : sample_indices(rng, schema.general_fields.size(),
                                     schema.general_fields.size())) {
        if (std::find(general_idx.begin(), general_idx.end(), g) != general_idx.end()) continue;
        general_idx.push_back(g);
        if (static_cast<int>(general_idx.size()) >= general_count) break;
      }
    }
    std::sort(general_idx.begin(), general_idx.end());
    for (size_t g : general_idx) {
      bool variant = chance(rng) < spec.raw_variant_rate;
      report.pairs.push_back(
          realize_field(rng, kGeneralScope, schema.general_fields[g], detector, variant));
    }

    for (const auto& id : report.scenario_ids) {
      const ScenarioSpec* s = schema.find_scenario(id);
      size_t field_count = static_cast<size_t>(
          std::min<int>(uniform_in(rng, spec.fields_per_scenario), static_cast<int>(s->fields.size())));
      for (size_t fi : sample_indices(rng, s->fields.size(), field_count)) {
        bool variant = chance(rng) < spec.raw_variant_rate;
        report.pairs.push_back(realize_field(rng, id, s->fields[fi], detector, variant));
      }
    }

    layout_document(report, spec.seed * 1000003ULL + i);
    report.noisy_doc = corrupt_document(rng, report.clean_doc, spec.ocr_char_confusion_rate);
    report.clean_recon = reconstruct_text(report.clean_doc, spec.line_overlap_ratio);

    auto masked = mask(report.clean_recon, rule_detector->detect(report.clean_recon), report.id);
    report.masked_text = std::move(masked.masked_text);
    report.table = std::move(masked.table);
  }

  std::int64_t gold_pairs = 0;
  for (const auto& r : reports) gold_pairs += static_cast<std::int64_t>(r.pairs.size());

  // ---- error plans ----
  MethodPlan cs_plan =
      build_plan(Method::chatschema, spec.chatschema, reports, schema, detector, spec.seed);
  MethodPlan bl_plan = build_plan(Method::baseline, spec.baseline, reports, schema, detector, spec.seed);

  // ---- write reports, gold, images ----
  for (const auto& report : reports) {
    write_file_atomic(out_dir / "reports" / (report.id + ".ocr.json"),
                      serialize_ocr_document(report.noisy_doc));
    ExtractionResult gold;
    gold.report_id = report.id;
    gold.schema_version = schema.version;
    for (const auto& pair : report.pairs) {
      KeyValuePair kv;
      kv.scenario_id = pair.scenario_id;
      kv.field_key = pair.spec->key;
      kv.value = pair.gold;
      if (pair.spec->canonical_unit) kv.unit = *pair.spec->canonical_unit;
      gold.pairs.push_back(std::move(kv));
    }
    write_file_atomic(out_dir / "gold" / (report.id + ".json"), serialize_extraction_result(gold));
    std::string image_text(report.image_bytes.begin(), report.image_bytes.end());
    write_file_atomic(out_dir / "images" / (report.id + ".png"), image_text);
  }

  // ---- cassettes: exactly the requests run_report will make ----
  std::string provider_id = spec.provider.id();
  for (const MethodPlan& plan : {cs_plan, bl_plan}) {
    for (const char* modality_str : {"image", "text", "both"}) {
      ModalityConfig modality = *modality_from_name(modality_str);
      std::string cell = std::string(method_name(plan.method)) + "_" + modality_str;
      fs::path cassette_path = out_dir / "cassettes" / (cell + ".jsonl");
      fs::remove(cassette_path);
      Cassette cassette(cassette_path, CassetteMode::record);

      size_t expected_entries = 0;
      for (size_t r = 0; r < reports.size(); ++r) {
        const GenReport& report = reports[r];
        std::optional<std::string> image_digest;
        if (modality.send_image) image_digest = sha256_hex(report.image_bytes);

        std::string masked;
        MappingTable table;
        if (modality.send_text) {
          std::string raw_noisy = reconstruct_text(report.noisy_doc, spec.line_overlap_ratio);
          std::string prompt = build_precorrection_prompt(templates, raw_noisy);
          cassette.append(request_fingerprint(provider_id, prompt, image_digest, modality),
                          fence_block(report.clean_recon));
          ++expected_entries;
          masked = report.masked_text;
          table = report.table;
        }

        if (plan.method == Method::chatschema) {
          std::string prompt = build_classification_prompt(templates, schema, masked);
          cassette.append(request_fingerprint(provider_id, prompt, image_digest, modality),
                          render_classification_response(report.scenario_ids));
          ++expected_entries;
        }

        std::string extraction_prompt =
            plan.method == Method::chatschema
                ? build_extraction_prompt(templates, schema, report.scenario_ids, masked)
                : build_baseline_prompt(templates, schema, masked);
        cassette.append(request_fingerprint(provider_id, extraction_prompt, image_digest, modality),
                        render_extraction_response(build_records(report, plan, r, table)));
        ++expected_entries;
      }
      if (cassette.size() != expected_entries)
        throw Error(ErrorKind::internal,
                    "fingerprint collision while generating cassette " + cell + " (" +
                        std::to_string(cassette.size()) + " of " +
                        std::to_string(expected_entries) + " entries)");
    }
  }

  // ---- manifest ----
  json manifest = json::object();
  manifest["seed"] = spec.seed;
  manifest["schema_version"] = schema.version;
  manifest["report_count"] = spec.report_count;
  manifest["gold_pairs"] = gold_pairs;
  manifest["line_overlap_ratio"] = spec.line_overlap_ratio;
  manifest["ocr_char_confusion_rate"] = spec.ocr_char_confusion_rate;
  manifest["raw_variant_rate"] = spec.raw_variant_rate;
  manifest["provider"] = spec.provider.to_json();
  manifest["detector"] = "default";
  manifest["templates"] = "default";
  json methods = json::object();
  methods["chatschema"] = expected_json(cs_plan, gold_pairs);
  methods["baseline"] = expected_json(bl_plan, gold_pairs);
  manifest["methods"] = methods;
  json report_rows = json::array();
  for (const auto& report : reports) {
    report_rows.push_back({{"report_id", report.id},
                           {"scenarios", report.scenario_ids},
                           {"gold_pairs", report.pairs.size()},
                           {"masked_entities", report.table.entries.size()}});
  }
  manifest["reports"] = report_rows;
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace medrex
