#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gateway/gateway.hpp"

namespace medrex {

std::string sniff_image_mime(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G')
    return "image/png";
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
    return "image/jpeg";
  if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return "image/bmp";
  return "application/octet-stream";
}

std::vector<std::uint8_t> bound_image_long_edge(const std::vector<std::uint8_t>& bytes, int max_edge) {
  if (max_edge <= 0 || bytes.empty()) return bytes;
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat img = cv::imdecode(raw, cv::IMREAD_COLOR);
  if (img.empty()) return bytes;  // not an image we can decode; send as-is
  int long_edge = std::max(img.cols, img.rows);
  if (long_edge <= max_edge) return bytes;
  double scale = static_cast<double>(max_edge) / long_edge;
  cv::Mat resized;
  cv::resize(img, resized, cv::Size(), scale, scale, cv::INTER_AREA);
  std::vector<std::uint8_t> out;
  cv::imencode(".png", resized, out);
  return out;
}

std::vector<std::uint8_t> render_placeholder_image(int width, int height, std::uint64_t seed) {
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(250, 250, 250));
  // A few seeded rows of gray boxes so pages are visually distinct.
  std::uint64_t state = seed * 6364136223846793005ULL + 1442695040888963407ULL;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  int rows = 6 + static_cast<int>(next() % 6);
  for (int r = 0; r < rows; ++r) {
    int y = 10 + r * std::max(12, (height - 20) / rows);
    if (y + 8 >= height) break;
    int w = 40 + static_cast<int>(next() % static_cast<std::uint64_t>(std::max(40, width - 60)));
    int shade = 140 + static_cast<int>(next() % 80);
    cv::rectangle(img, cv::Rect(10, y, std::min(w, width - 20), 8),
                  cv::Scalar(shade, shade, shade), cv::FILLED);
  }
  std::vector<std::uint8_t> out;
  cv::imencode(".png", img, out);
  return out;
}

}  // namespace medrex
