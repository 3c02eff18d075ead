#include <algorithm>
#include <regex>

#include "common/errors.hpp"
#include "common/strings.hpp"
#include "ocr/ocr.hpp"

namespace medrex {

namespace {

std::string strip_tags(const std::string& html) {
  std::string out;
  bool in_tag = false;
  for (char c : html) {
    if (c == '<')
      in_tag = true;
    else if (c == '>')
      in_tag = false;
    else if (!in_tag)
      out.push_back(c);
  }
  return out;
}

std::string decode_entities(std::string s) {
  s = replace_all(std::move(s), "&lt;", "<");
  s = replace_all(std::move(s), "&gt;", ">");
  s = replace_all(std::move(s), "&quot;", "\"");
  s = replace_all(std::move(s), "&#39;", "'");
  s = replace_all(std::move(s), "&amp;", "&");
  return s;
}

// Pulls "bbox x0 y0 x1 y1" and optional "x_wconf N" out of a title attribute.
bool parse_title(const std::string& title, std::array<double, 4>& bbox, double& conf) {
  static const std::regex bbox_re(R"(bbox\s+(-?\d+)\s+(-?\d+)\s+(-?\d+)\s+(-?\d+))");
  static const std::regex conf_re(R"(x_wconf\s+(\d+(?:\.\d+)?))");
  std::smatch m;
  if (!std::regex_search(title, m, bbox_re)) return false;
  for (int i = 0; i < 4; ++i) bbox[static_cast<size_t>(i)] = std::stod(m[i + 1].str());
  if (std::regex_search(title, m, conf_re)) {
    conf = std::stod(m[1].str()) / 100.0;
    conf = std::clamp(conf, 0.0, 1.0);
  } else {
    conf = 1.0;
  }
  return true;
}

}  // namespace

OcrDocument from_hocr(std::string_view html, std::string report_id) {
  std::string text(html);
  OcrDocument doc;
  doc.report_id = std::move(report_id);

  // Title attributes may contain the other quote kind ('image "p.png"; ...').
  static const std::regex page_re(
      R"re(class=['"]ocr_page['"][^>]*title=(?:'([^']*)'|"([^"]*)"))re");
  std::smatch m;
  if (std::regex_search(text, m, page_re)) {
    std::array<double, 4> bbox{};
    double conf = 1.0;
    std::string title = m[1].matched ? m[1].str() : m[2].str();
    if (parse_title(title, bbox, conf)) {
      doc.page_width = bbox[2];
      doc.page_height = bbox[3];
    }
  }

  // Words first; fall back to lines for hOCR emitters without word spans.
  static const std::regex word_re(
      R"re(<span[^>]*class=['"](ocrx_word|ocr_line)['"][^>]*title=(?:'([^']*)'|"([^"]*)")[^>]*>([\s\S]*?)</span>)re");
  auto begin = std::sregex_iterator(text.begin(), text.end(), word_re);
  bool saw_word = false;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    if ((*it)[1].str() == "ocrx_word") saw_word = true;
  }
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const std::smatch& w = *it;
    if (saw_word && w[1].str() != "ocrx_word") continue;
    OcrSegment seg;
    std::string title = w[2].matched ? w[2].str() : w[3].str();
    if (!parse_title(title, seg.bbox, seg.confidence)) continue;
    seg.text = std::string(trim(decode_entities(strip_tags(w[4].str()))));
    if (seg.text.empty()) continue;
    doc.segments.push_back(std::move(seg));
  }

  if (doc.page_width <= 0 || doc.page_height <= 0) {
    // No page box; take the segment hull plus a margin.
    double w = 1, h = 1;
    for (const auto& s : doc.segments) {
      w = std::max(w, s.bbox[2]);
      h = std::max(h, s.bbox[3]);
    }
    doc.page_width = w + 1;
    doc.page_height = h + 1;
  }
  if (doc.segments.empty())
    throw parse_error("hocr: no ocrx_word or ocr_line spans with bbox annotations found");
  return doc;
}

}  // namespace medrex
