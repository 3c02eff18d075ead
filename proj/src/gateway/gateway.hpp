#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/jsonio.hpp"

namespace medrex {

struct ModalityConfig {
  bool send_text = true;
  bool send_image = false;

  bool valid() const { return send_text || send_image; }
  bool operator==(const ModalityConfig&) const = default;
};

// "text" | "image" | "both"
const char* modality_name(ModalityConfig m);
std::optional<ModalityConfig> modality_from_name(std::string_view name);

struct ProviderConfig {
  std::string kind;  // "openai" | "gemini" | "mock"
  std::string base_url;
  std::string model;
  std::string api_key_env;  // environment variable NAME, never a literal key
  json mock_rules = json::array();

  std::string id() const { return kind + "/" + model; }

  static ProviderConfig from_json(const json& j);
  static ProviderConfig from_json_text(std::string_view text);
  json to_json() const;
};

std::string request_fingerprint(const std::string& provider_id, std::string_view prompt,
                                const std::optional<std::string>& image_digest,
                                ModalityConfig modality);

enum class CassetteMode { record, replay };

// JSON-lines store of {"fingerprint", "response"}; replay answers from it,
// record appends live responses. First entry wins on duplicate fingerprints.
class Cassette {
 public:
  Cassette(std::filesystem::path path, CassetteMode mode);

  std::optional<std::string> lookup(const std::string& fingerprint) const;
  void append(const std::string& fingerprint, const std::string& response);
  CassetteMode mode() const { return mode_; }
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::filesystem::path path_;
  CassetteMode mode_;
};

struct WireRequest {
  std::string host;  // scheme://host[:port]
  std::string path;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;  // JSON
};

struct UniformRequest {
  std::string prompt;
  std::optional<std::vector<std::uint8_t>> image;
  ModalityConfig modality;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Returns the response body; throws transport_error on failure.
  virtual std::string post(const WireRequest& request) = 0;
};

// Real transport over cpp-httplib. Honors MEDREX_NO_NETWORK=1 by refusing
// every request, which test suites use as a no-network guard.
std::unique_ptr<HttpTransport> make_httplib_transport(int timeout_seconds = 60);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual bool is_live() const = 0;
  // Live providers translate to/from their wire format.
  virtual WireRequest build_request(const UniformRequest& request) const;
  virtual std::string parse_response(const std::string& body) const;
  // Offline providers answer directly.
  virtual std::string respond(const UniformRequest& request) const;
};

struct GatewayOptions {
  int max_retries = 3;
  int backoff_base_ms = 250;
  int rate_limit_per_minute = 30;
  int decoding_seed = 7;
  int image_max_long_edge = 2048;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, const GatewayOptions& options);

// Uniform completion entry point with record/replay, retries, and a
// per-provider token-bucket rate limit. Shareable across worker threads.
class Gateway {
 public:
  Gateway(ProviderConfig config, GatewayOptions options, std::shared_ptr<Cassette> cassette,
          std::unique_ptr<HttpTransport> transport = nullptr);
  ~Gateway();

  std::string complete(const std::string& prompt, const std::optional<std::vector<std::uint8_t>>& image,
                       ModalityConfig modality);

  const std::string& provider_id() const { return provider_id_; }
  int live_calls() const { return live_calls_.load(); }
  const GatewayOptions& options() const { return options_; }

 private:
  std::string call_live(const UniformRequest& request);

  ProviderConfig config_;
  GatewayOptions options_;
  std::string provider_id_;
  std::unique_ptr<Provider> provider_;
  std::shared_ptr<Cassette> cassette_;
  std::unique_ptr<HttpTransport> transport_;
  std::atomic<int> live_calls_{0};
  struct RateLimiter;
  std::unique_ptr<RateLimiter> limiter_;
};

// Image helpers (OpenCV-backed). Returns the original bytes when the payload
// already fits or cannot be decoded.
std::vector<std::uint8_t> bound_image_long_edge(const std::vector<std::uint8_t>& bytes, int max_edge);
std::string sniff_image_mime(const std::vector<std::uint8_t>& bytes);
// Deterministic synthetic page image for generated corpora.
std::vector<std::uint8_t> render_placeholder_image(int width, int height, std::uint64_t seed);

}  // namespace medrex
