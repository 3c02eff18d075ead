#include "ocr/ocr.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "common/errors.hpp"
#include "common/jsonio.hpp"

namespace medrex {
namespace {

OcrSegment seg(const std::string& text, double x0, double y0, double x1, double y1,
               double confidence = 0.9) {
  return {text, {x0, y0, x1, y1}, confidence};
}

OcrDocument doc(std::vector<OcrSegment> segments, double w = 1000, double h = 1000) {
  OcrDocument d;
  d.report_id = "t";
  d.page_width = w;
  d.page_height = h;
  d.segments = std::move(segments);
  return d;
}

TEST(ParseOcr, FixtureSegmentCount) {
  json j = json::object();
  j["report_id"] = "r1";
  j["page"] = {{"width", 800}, {"height", 1200}};
  j["image"] = nullptr;
  json segments = json::array();
  for (int i = 0; i < 40; ++i)
    segments.push_back({{"text", "t" + std::to_string(i)},
                        {"bbox", {10, 10 + i * 20, 100, 25 + i * 20}},
                        {"confidence", 0.9}});
  j["segments"] = segments;
  OcrDocument d = parse_ocr_document(j.dump());
  EXPECT_EQ(d.segments.size(), 40u);
  EXPECT_EQ(d.report_id, "r1");
}

TEST(ParseOcr, ZeroSegmentsIsValid) {
  OcrDocument d = parse_ocr_document(
      R"({"report_id": "r", "page": {"width": 100, "height": 100}, "segments": []})");
  EXPECT_TRUE(d.segments.empty());
  EXPECT_EQ(reconstruct_text(d), "");
}

TEST(ParseOcr, InvertedBboxNamesSegment) {
  const char* text = R"({
    "report_id": "r", "page": {"width": 100, "height": 100},
    "segments": [
      {"text": "ok", "bbox": [1, 1, 50, 10], "confidence": 1.0},
      {"text": "bad", "bbox": [60, 1, 10, 10], "confidence": 1.0}
    ]})";
  try {
    parse_ocr_document(text);
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("segment 1"), std::string::npos);
  }
}

TEST(ParseOcr, OutOfBoundsBboxRejected) {
  const char* text = R"({
    "report_id": "r", "page": {"width": 100, "height": 100},
    "segments": [{"text": "t", "bbox": [90, 10, 150, 20], "confidence": 1.0}]})";
  EXPECT_THROW(parse_ocr_document(text), Error);
}

TEST(ParseOcr, MalformedSegmentNamesIndex) {
  const char* text = R"({
    "report_id": "r", "page": {"width": 100, "height": 100},
    "segments": [{"text": "t", "bbox": [1,1,2,2]}, {"bbox": [1,1,2,2]}]})";
  try {
    parse_ocr_document(text);
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("segment 1"), std::string::npos);
  }
}

TEST(ParseOcr, RoundTripThroughSerialize) {
  OcrDocument d = doc({seg("WBC", 10, 10, 60, 30), seg("6.2", 70, 12, 110, 32)});
  d.source_image_ref = "images/t.png";
  OcrDocument back = parse_ocr_document(serialize_ocr_document(d));
  EXPECT_EQ(back.report_id, d.report_id);
  ASSERT_EQ(back.segments.size(), d.segments.size());
  EXPECT_EQ(back.segments[0].text, "WBC");
  EXPECT_EQ(back.source_image_ref, d.source_image_ref);
}

TEST(Reconstruct, SingleSegment) {
  OcrDocument d = doc({seg("Hemoglobin 135 g/L", 10, 10, 200, 30)});
  EXPECT_EQ(reconstruct_text(d), "Hemoglobin 135 g/L");
}

TEST(Reconstruct, TwoSegmentsShareLine) {
  OcrDocument d = doc({seg("WBC", 10, 10, 60, 30), seg("6.2", 70, 12, 110, 32)});
  EXPECT_EQ(reconstruct_text(d), "WBC 6.2");
}

TEST(Reconstruct, VerticallySeparatedSegmentsMakeTwoLines) {
  OcrDocument d = doc({seg("A-text", 10, 10, 60, 30), seg("B-text", 10, 100, 60, 120)});
  EXPECT_EQ(reconstruct_text(d), "A-text\nB-text");
}

TEST(Reconstruct, OverlapThresholdIsInclusive) {
  // Heights 20 and 20; overlap exactly 10 = 0.5 * 20 -> same line at ratio 0.5.
  OcrDocument d = doc({seg("L", 10, 10, 30, 30), seg("R", 40, 20, 60, 40)});
  EXPECT_EQ(reconstruct_text(d, 0.5), "L R");
  // A stricter ratio splits them.
  EXPECT_EQ(reconstruct_text(d, 0.75), "L\nR");
}

TEST(Reconstruct, TransitiveChaining) {
  // A overlaps B, B overlaps C; A and C land on the same line via closure.
  OcrDocument d = doc({seg("A", 10, 10, 30, 30), seg("B", 40, 20, 60, 40),
                       seg("C", 70, 30, 90, 50)});
  EXPECT_EQ(reconstruct_text(d), "A B C");
}

TEST(Reconstruct, InvalidRatioRejected) {
  OcrDocument d = doc({seg("A", 10, 10, 30, 30)});
  EXPECT_THROW(reconstruct_text(d, 0.0), Error);
  EXPECT_THROW(reconstruct_text(d, 1.5), Error);
}

TEST(Reconstruct, PermutationInvariance) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> count(1, 14);
  std::uniform_real_distribution<double> pos(0, 900);
  std::uniform_real_distribution<double> size(5, 80);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<OcrSegment> segments;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
      double x0 = pos(rng), y0 = pos(rng);
      segments.push_back(seg("s" + std::to_string(i), x0, y0, x0 + size(rng), y0 + size(rng)));
    }
    OcrDocument base = doc(segments);
    std::string expected = reconstruct_text(base);
    for (int shuffle = 0; shuffle < 5; ++shuffle) {
      std::shuffle(segments.begin(), segments.end(), rng);
      EXPECT_EQ(reconstruct_text(doc(segments)), expected) << "trial " << trial;
    }
  }
}

TEST(Reconstruct, EveryTextAppearsExactlyOnce) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(0, 900);
  std::uniform_real_distribution<double> size(5, 60);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<OcrSegment> segments;
    for (int i = 0; i < 10; ++i) {
      double x0 = pos(rng), y0 = pos(rng);
      segments.push_back(
          seg("tok" + std::to_string(i) + "x", x0, y0, x0 + size(rng), y0 + size(rng)));
    }
    std::string text = reconstruct_text(doc(segments));
    for (int i = 0; i < 10; ++i) {
      std::string token = "tok" + std::to_string(i) + "x";
      size_t first = text.find(token);
      ASSERT_NE(first, std::string::npos);
      EXPECT_EQ(text.find(token, first + 1), std::string::npos);
    }
  }
}

TEST(Reconstruct, LoweredSegmentEndsUpOnFinalLine) {
  std::vector<OcrSegment> segments = {seg("top", 10, 10, 50, 30), seg("mid", 10, 50, 50, 70),
                                      seg("sink", 10, 500, 50, 520)};
  std::string text = reconstruct_text(doc(segments));
  auto last_line = text.substr(text.rfind('\n') + 1);
  EXPECT_EQ(last_line, "sink");
}

TEST(Hocr, BestEffortConversion) {
  const char* hocr = R"(
  <html><body>
  <div class='ocr_page' title='image "p.png"; bbox 0 0 800 600'>
    <span class='ocrx_word' title='bbox 10 10 80 30; x_wconf 96'>WBC</span>
    <span class='ocrx_word' title='bbox 90 12 150 32; x_wconf 90'>6.2</span>
    <span class='ocrx_word' title='bbox 10 50 80 70; x_wconf 88'>HGB &amp; HCT</span>
  </div></body></html>)";
  OcrDocument d = from_hocr(hocr, "h1");
  EXPECT_EQ(d.report_id, "h1");
  EXPECT_EQ(d.page_width, 800);
  ASSERT_EQ(d.segments.size(), 3u);
  EXPECT_EQ(d.segments[0].text, "WBC");
  EXPECT_DOUBLE_EQ(d.segments[0].confidence, 0.96);
  EXPECT_EQ(d.segments[2].text, "HGB & HCT");
  EXPECT_EQ(reconstruct_text(d), "WBC 6.2\nHGB & HCT");
}

TEST(Hocr, NoWordsIsParseError) {
  EXPECT_THROW(from_hocr("<html><body>nothing</body></html>", "x"), Error);
}

}  // namespace
}  // namespace medrex
