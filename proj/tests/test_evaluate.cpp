#include "evaluate/evaluate.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "common/errors.hpp"

namespace medrex {
namespace {

KeyValuePair pair_of(const std::string& scenario, const std::string& key, std::int64_t v) {
  return {scenario, key, TypedValue::of_integer(v), std::nullopt, ""};
}

ExtractionResult result_of(const std::string& report_id, std::vector<KeyValuePair> pairs) {
  ExtractionResult r;
  r.report_id = report_id;
  r.pairs = std::move(pairs);
  return r;
}

// Quadratic reference matcher used as the oracle for match_pairs.
ConfusionBreakdown brute_force_match(const ExtractionResult& gold, const ExtractionResult& pred) {
  ConfusionBreakdown out;
  std::vector<bool> gold_used(gold.pairs.size(), false);
  for (const auto& p : pred.pairs) {
    bool matched = false;
    for (size_t g = 0; g < gold.pairs.size(); ++g) {
      if (gold_used[g]) continue;
      if (gold.pairs[g].scenario_id != p.scenario_id || gold.pairs[g].field_key != p.field_key)
        continue;
      gold_used[g] = true;
      matched = true;
      if (values_equal(gold.pairs[g].value, p.value))
        out.corrects.push_back({gold.pairs[g], p});
      else
        out.value_mismatches.push_back({gold.pairs[g], p});
      break;
    }
    if (!matched) out.key_fp.push_back(p);
  }
  for (size_t g = 0; g < gold.pairs.size(); ++g)
    if (!gold_used[g]) out.key_fn.push_back(gold.pairs[g]);
  return out;
}

TEST(ValuesEqual, FloatRelativeTolerance) {
  EXPECT_TRUE(values_equal(TypedValue::of_float(1.0), TypedValue::of_float(1.0 + 1e-12)));
  EXPECT_FALSE(values_equal(TypedValue::of_float(1.0), TypedValue::of_float(1.0 + 1e-6)));
  EXPECT_TRUE(values_equal(TypedValue::of_float(0.0), TypedValue::of_float(0.0)));
  EXPECT_TRUE(values_equal(TypedValue::of_float(1e12), TypedValue::of_float(1e12 + 1.0)));
}

TEST(ValuesEqual, StringNfcAndWhitespace) {
  // "é" composed vs decomposed compares equal under NFC.
  EXPECT_TRUE(values_equal(TypedValue::of_string("café"),
                           TypedValue::of_string("café")));
  EXPECT_TRUE(values_equal(TypedValue::of_string("a   b\tc"), TypedValue::of_string("a b c")));
  EXPECT_TRUE(values_equal(TypedValue::of_string(" pad "), TypedValue::of_string("pad")));
}

TEST(ValuesEqual, PunctuationDifferencesStaySignificant) {
  // A Chinese semicolon is not an English semicolon.
  EXPECT_FALSE(values_equal(TypedValue::of_string("高血压；糖尿病"),
                            TypedValue::of_string("高血压;糖尿病")));
}

TEST(ValuesEqual, KindMismatchNeverEqual) {
  EXPECT_FALSE(values_equal(TypedValue::of_string("42"), TypedValue::of_integer(42)));
}

TEST(MatchPairs, IdenticalResultsAllCorrect) {
  std::vector<KeyValuePair> pairs;
  for (int i = 0; i < 5; ++i) pairs.push_back(pair_of("s", "k" + std::to_string(i), i));
  ConfusionBreakdown b = match_pairs(result_of("r", pairs), result_of("r", pairs));
  EXPECT_EQ(b.n_corrects(), 5);
  EXPECT_TRUE(b.value_mismatches.empty());
  EXPECT_TRUE(b.key_fp.empty());
  EXPECT_TRUE(b.key_fn.empty());
}

TEST(MatchPairs, WorkedExample) {
  // gold {A:1, B:2}, predicted {A:1, B:3, C:4}
  auto gold = result_of("r", {pair_of("s", "A", 1), pair_of("s", "B", 2)});
  auto pred = result_of("r", {pair_of("s", "A", 1), pair_of("s", "B", 3), pair_of("s", "C", 4)});
  ConfusionBreakdown b = match_pairs(gold, pred);
  ASSERT_EQ(b.corrects.size(), 1u);
  EXPECT_EQ(b.corrects[0].gold.field_key, "A");
  ASSERT_EQ(b.value_mismatches.size(), 1u);
  EXPECT_EQ(b.value_mismatches[0].gold.field_key, "B");
  ASSERT_EQ(b.key_fp.size(), 1u);
  EXPECT_EQ(b.key_fp[0].field_key, "C");
  EXPECT_TRUE(b.key_fn.empty());
}

TEST(MatchPairs, EmptyPredictionAllFn) {
  auto gold = result_of("r", {pair_of("s", "A", 1)});
  ConfusionBreakdown b = match_pairs(gold, result_of("r", {}));
  EXPECT_TRUE(b.corrects.empty());
  ASSERT_EQ(b.key_fn.size(), 1u);
  EXPECT_EQ(b.key_fn[0].field_key, "A");
}

TEST(MatchPairs, SameKeyDifferentScenarioDoesNotMatch) {
  auto gold = result_of("r", {pair_of("cbc", "WBC", 6)});
  auto pred = result_of("r", {pair_of("urinalysis", "WBC", 6)});
  ConfusionBreakdown b = match_pairs(gold, pred);
  EXPECT_EQ(b.key_fp.size(), 1u);
  EXPECT_EQ(b.key_fn.size(), 1u);
}

TEST(MatchPairs, ReportIdMismatchIsUsageError) {
  EXPECT_THROW(match_pairs(result_of("a", {}), result_of("b", {})), Error);
}

TEST(ComputeMetrics, WorkedVector) {
  MetricsReport m = compute_metrics(MetricCounts{90, 6, 4, 3});
  EXPECT_EQ(m.tp_key, 96);
  EXPECT_NEAR(m.key_precision, 0.9600, 1e-4);
  EXPECT_NEAR(m.key_recall, 0.9697, 1e-4);
  EXPECT_NEAR(m.key_f1, 0.9648, 1e-4);
  EXPECT_NEAR(m.accuracy, 0.9375, 1e-4);
  EXPECT_NEAR(m.precision, 0.9000, 1e-4);
  EXPECT_NEAR(m.recall, 0.9091, 1e-4);
  EXPECT_NEAR(m.f1, 0.9045, 1e-4);
}

TEST(ComputeMetrics, AllCorrectIsOnes) {
  MetricsReport m = compute_metrics(MetricCounts{10, 0, 0, 0});
  EXPECT_DOUBLE_EQ(m.key_precision, 1.0);
  EXPECT_DOUBLE_EQ(m.key_recall, 1.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 1.0);
}

TEST(ComputeMetrics, AllEmptyConventionIsOnes) {
  MetricsReport m = compute_metrics(MetricCounts{0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(m.key_precision, 1.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 1.0);
}

TEST(ComputeMetrics, ZeroDenominatorsAreZero) {
  // Only false positives: no tp, no fn.
  MetricsReport m = compute_metrics(MetricCounts{0, 0, 5, 0});
  EXPECT_DOUBLE_EQ(m.key_precision, 0.0);
  EXPECT_DOUBLE_EQ(m.key_recall, 0.0);  // 0/0 convention
  EXPECT_DOUBLE_EQ(m.key_f1, 0.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(m.f1, 0.0);
}

TEST(ComputeMetrics, IdentitiesHoldExactly) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(0, 50);
  for (int trial = 0; trial < 200; ++trial) {
    MetricCounts counts{c(rng), c(rng), c(rng), c(rng)};
    MetricsReport m = compute_metrics(counts);
    EXPECT_DOUBLE_EQ(m.precision, m.key_precision * m.accuracy);
    EXPECT_DOUBLE_EQ(m.recall, m.key_recall * m.accuracy);
    double expected_f1 =
        (m.precision + m.recall) == 0 ? 0 : 2 * m.precision * m.recall / (m.precision + m.recall);
    EXPECT_DOUBLE_EQ(m.f1, expected_f1);
    EXPECT_LE(m.accuracy, 1.0);
    EXPECT_GE(m.accuracy, 0.0);
  }
}

TEST(Aggregate, MicroAverageOfEqualsIsUnchanged) {
  ConfusionBreakdown b;
  b.corrects.push_back({pair_of("s", "A", 1), pair_of("s", "A", 1)});
  b.key_fp.push_back(pair_of("s", "X", 9));
  std::vector<ConfusionBreakdown> two = {b, b};
  MetricsReport one = compute_metrics(b);
  MetricsReport both = aggregate(two);
  EXPECT_DOUBLE_EQ(one.key_precision, both.key_precision);
  EXPECT_DOUBLE_EQ(one.accuracy, both.accuracy);
  EXPECT_DOUBLE_EQ(one.f1, both.f1);
}

TEST(Aggregate, HandComputedMixture) {
  // (corrects=1, fp=1) + (corrects=1, fn=1): tp=2, key_p=2/3, key_r=2/3, acc=1.
  ConfusionBreakdown b1, b2;
  b1.corrects.push_back({pair_of("s", "A", 1), pair_of("s", "A", 1)});
  b1.key_fp.push_back(pair_of("s", "X", 1));
  b2.corrects.push_back({pair_of("s", "B", 1), pair_of("s", "B", 1)});
  b2.key_fn.push_back(pair_of("s", "Y", 1));
  std::vector<ConfusionBreakdown> both = {b1, b2};
  MetricsReport m = aggregate(both);
  EXPECT_EQ(m.tp_key, 2);
  EXPECT_NEAR(m.key_precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.key_recall, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
}

TEST(Aggregate, SingleEqualsCompute) {
  ConfusionBreakdown b;
  b.corrects.push_back({pair_of("s", "A", 1), pair_of("s", "A", 1)});
  b.value_mismatches.push_back({pair_of("s", "B", 1), pair_of("s", "B", 2)});
  std::vector<ConfusionBreakdown> one = {b};
  EXPECT_DOUBLE_EQ(aggregate(one).f1, compute_metrics(b).f1);
}

TEST(Aggregate, EmptyListIsUsageError) {
  std::vector<ConfusionBreakdown> none;
  EXPECT_THROW(aggregate(none), Error);
}

TEST(MetricsCsv, PercentOneDecimal) {
  MetricsReport m = compute_metrics(MetricCounts{90, 6, 4, 3});
  EXPECT_EQ(metrics_csv_row(m), "96.0,97.0,96.5,93.8,90.0,90.9,90.5");
}

TEST(ErrorReport, IncompleteDateTagged) {
  ConfusionBreakdown b;
  KeyValuePair gold{"s", "Report Time", TypedValue::of_datetime("2024-05-12"), std::nullopt, ""};
  KeyValuePair pred{"s", "Report Time", TypedValue::of_datetime("2024-05-01"), std::nullopt,
                    "(s, \"Report Time\", \"2024-05- \")"};
  b.value_mismatches.push_back({gold, pred});
  ErrorReport report = error_report(b);
  ASSERT_EQ(report.cases.size(), 1u);
  EXPECT_EQ(report.cases[0].category, "value-mismatch");
  EXPECT_EQ(report.cases[0].tag, "incomplete-date");
}

TEST(ErrorReport, PunctuationOnlyTagged) {
  ConfusionBreakdown b;
  KeyValuePair gold{"s", "Diagnosis", TypedValue::of_string("高血压；糖尿病"), std::nullopt, ""};
  KeyValuePair pred{"s", "Diagnosis", TypedValue::of_string("高血压;糖尿病"), std::nullopt, ""};
  b.value_mismatches.push_back({gold, pred});
  ErrorReport report = error_report(b);
  ASSERT_EQ(report.cases.size(), 1u);
  EXPECT_EQ(report.cases[0].tag, "punctuation-only");
}

TEST(ErrorReport, KeyCasesTaggedKeyMatchProblem) {
  ConfusionBreakdown b;
  b.key_fp.push_back(pair_of("s", "Extra", 1));
  b.key_fn.push_back(pair_of("s", "Missing", 2));
  ErrorReport report = error_report(b);
  ASSERT_EQ(report.cases.size(), 2u);
  EXPECT_EQ(report.cases[0].category, "key-fp");
  EXPECT_EQ(report.cases[0].tag, "key match problem");
  EXPECT_EQ(report.cases[1].category, "key-fn");
}

TEST(ErrorReport, EmptyBreakdownEmptyReport) {
  ErrorReport report = error_report(ConfusionBreakdown{});
  EXPECT_TRUE(report.cases.empty());
  EXPECT_NE(error_report_to_text(report).find("value-mismatch (0)"), std::string::npos);
}

TEST(MatchProperties, BruteForceEquivalencePartitionAndSymmetry) {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> n_pairs(0, 12);
  std::uniform_int_distribution<int> key_id(0, 5);
  std::uniform_int_distribution<int> scenario_id(0, 2);
  std::uniform_int_distribution<int> value(0, 3);

  for (int trial = 0; trial < 1000; ++trial) {
    auto make_side = [&](const std::string& report) {
      std::vector<KeyValuePair> pairs;
      std::map<std::pair<std::string, std::string>, bool> used;
      int n = n_pairs(rng);
      for (int i = 0; i < n; ++i) {
        std::string scenario = "s" + std::to_string(scenario_id(rng));
        std::string key = "k" + std::to_string(key_id(rng));
        if (used[{scenario, key}]) continue;  // results never repeat keys
        used[{scenario, key}] = true;
        pairs.push_back(pair_of(scenario, key, value(rng)));
      }
      return result_of(report, pairs);
    };
    ExtractionResult gold = make_side("r");
    ExtractionResult pred = make_side("r");

    ConfusionBreakdown fast = match_pairs(gold, pred);
    ConfusionBreakdown slow = brute_force_match(gold, pred);
    EXPECT_EQ(fast.n_corrects(), slow.n_corrects());
    EXPECT_EQ(fast.value_mismatches.size(), slow.value_mismatches.size());
    EXPECT_EQ(fast.fp_key(), slow.fp_key());
    EXPECT_EQ(fast.fn_key(), slow.fn_key());

    // Partition.
    EXPECT_EQ(gold.pairs.size(),
              fast.corrects.size() + fast.value_mismatches.size() + fast.key_fn.size());
    EXPECT_EQ(pred.pairs.size(),
              fast.corrects.size() + fast.value_mismatches.size() + fast.key_fp.size());

    // Symmetry: swapping sides swaps fp and fn.
    ConfusionBreakdown swapped = match_pairs(pred, gold);
    EXPECT_EQ(swapped.n_corrects(), fast.n_corrects());
    EXPECT_EQ(swapped.value_mismatches.size(), fast.value_mismatches.size());
    EXPECT_EQ(swapped.fp_key(), fast.fn_key());
    EXPECT_EQ(swapped.fn_key(), fast.fp_key());
  }
}

}  // namespace
}  // namespace medrex
