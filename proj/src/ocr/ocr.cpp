#include "ocr/ocr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/errors.hpp"
#include "common/jsonio.hpp"
#include "common/strings.hpp"

namespace medrex {

namespace {

void validate_document(const OcrDocument& doc) {
  if (trim(doc.report_id).empty()) throw validation_error("ocr document: report_id must be non-empty");
  if (doc.page_width <= 0 || doc.page_height <= 0)
    throw validation_error("ocr document " + doc.report_id + ": page size must be positive");
  for (size_t i = 0; i < doc.segments.size(); ++i) {
    const auto& s = doc.segments[i];
    std::string where = "segment " + std::to_string(i) + " of " + doc.report_id;
    if (trim(s.text).empty()) throw validation_error(where + ": text empty after trimming");
    auto [x0, y0, x1, y1] = s.bbox;
    if (!(x0 < x1) || !(y0 < y1))
      throw validation_error(where + ": bbox must satisfy x0 < x1 and y0 < y1");
    if (x0 < 0 || y0 < 0 || x1 > doc.page_width || y1 > doc.page_height)
      throw validation_error(where + ": bbox outside page bounds");
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0))
      throw validation_error(where + ": confidence must be within [0,1]");
  }
}

struct DisjointSet {
  std::vector<size_t> parent;
  explicit DisjointSet(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  size_t find(size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

OcrDocument parse_ocr_document(std::string_view text) {
  json j = parse_json(text, "ocr document");
  if (!j.is_object()) throw parse_error("ocr document: top level must be an object");
  OcrDocument doc;
  doc.report_id = j.value("report_id", "");
  if (j.contains("page")) {
    doc.page_width = j.at("page").value("width", 0.0);
    doc.page_height = j.at("page").value("height", 0.0);
  }
  if (j.contains("image") && !j.at("image").is_null())
    doc.source_image_ref = j.at("image").get<std::string>();
  if (j.contains("segments")) {
    const auto& segs = j.at("segments");
    for (size_t i = 0; i < segs.size(); ++i) {
      const auto& sj = segs[i];
      try {
        OcrSegment s;
        s.text = sj.at("text").get<std::string>();
        const auto& bb = sj.at("bbox");
        if (!bb.is_array() || bb.size() != 4)
          throw parse_error("bbox must be [x0,y0,x1,y1]");
        for (size_t k = 0; k < 4; ++k) s.bbox[k] = bb[k].get<double>();
        s.confidence = sj.value("confidence", 1.0);
        doc.segments.push_back(std::move(s));
      } catch (const nlohmann::json::exception& e) {
        throw parse_error("ocr document segment " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  validate_document(doc);
  return doc;
}

OcrDocument parse_ocr_document_file(const std::string& path) {
  return parse_ocr_document(read_file(path));
}

std::string serialize_ocr_document(const OcrDocument& doc) {
  json j = json::object();
  j["report_id"] = doc.report_id;
  j["page"] = {{"width", doc.page_width}, {"height", doc.page_height}};
  j["image"] = doc.source_image_ref ? json(*doc.source_image_ref) : json(nullptr);
  json segs = json::array();
  for (const auto& s : doc.segments) {
    segs.push_back({{"text", s.text},
                    {"bbox", {s.bbox[0], s.bbox[1], s.bbox[2], s.bbox[3]}},
                    {"confidence", s.confidence}});
  }
  j["segments"] = segs;
  return j.dump(2) + "\n";
}

std::string reconstruct_text(const OcrDocument& doc, double line_overlap_ratio) {
  if (!(line_overlap_ratio > 0.0 && line_overlap_ratio <= 1.0))
    throw usage_error("line_overlap_ratio must be in (0,1]");
  const auto& segs = doc.segments;
  if (segs.empty()) return "";

  DisjointSet groups(segs.size());
  for (size_t a = 0; a < segs.size(); ++a) {
    for (size_t b = a + 1; b < segs.size(); ++b) {
      double ha = segs[a].bbox[3] - segs[a].bbox[1];
      double hb = segs[b].bbox[3] - segs[b].bbox[1];
      double overlap = std::min(segs[a].bbox[3], segs[b].bbox[3]) -
                       std::max(segs[a].bbox[1], segs[b].bbox[1]);
      if (overlap >= line_overlap_ratio * std::min(ha, hb)) groups.unite(a, b);
    }
  }

  struct Line {
    double top = 0;
    double left = 0;
    std::vector<size_t> members;
    std::string joined;
  };
  std::vector<Line> lines;
  std::vector<long> line_of(segs.size(), -1);
  for (size_t i = 0; i < segs.size(); ++i) {
    size_t root = groups.find(i);
    if (line_of[root] < 0) {
      line_of[root] = static_cast<long>(lines.size());
      lines.push_back({segs[i].bbox[1], segs[i].bbox[0], {}, {}});
    }
    Line& line = lines[static_cast<size_t>(line_of[root])];
    line.top = std::min(line.top, segs[i].bbox[1]);
    line.left = std::min(line.left, segs[i].bbox[0]);
    line.members.push_back(i);
  }

  for (auto& line : lines) {
    std::sort(line.members.begin(), line.members.end(), [&](size_t a, size_t b) {
      if (segs[a].bbox[0] != segs[b].bbox[0]) return segs[a].bbox[0] < segs[b].bbox[0];
      if (segs[a].bbox[1] != segs[b].bbox[1]) return segs[a].bbox[1] < segs[b].bbox[1];
      return segs[a].text < segs[b].text;
    });
    for (size_t k = 0; k < line.members.size(); ++k) {
      if (k) line.joined.push_back(' ');
      line.joined += segs[line.members[k]].text;
    }
  }

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.top != b.top) return a.top < b.top;
    if (a.left != b.left) return a.left < b.left;
    return a.joined < b.joined;
  });

  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i].joined;
  }
  return out;
}

}  // namespace medrex
