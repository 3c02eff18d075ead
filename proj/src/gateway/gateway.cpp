#include "gateway/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <thread>

#include "common/errors.hpp"
#include "common/strings.hpp"

namespace medrex {

namespace {
constexpr std::string_view kFingerprintScheme = "medrex-fp-v1";
}

const char* modality_name(ModalityConfig m) {
  if (m.send_text && m.send_image) return "both";
  if (m.send_image) return "image";
  return "text";
}

std::optional<ModalityConfig> modality_from_name(std::string_view name) {
  if (name == "text") return ModalityConfig{true, false};
  if (name == "image") return ModalityConfig{false, true};
  if (name == "both") return ModalityConfig{true, true};
  return std::nullopt;
}

ProviderConfig ProviderConfig::from_json(const json& j) {
  ProviderConfig config;
  config.kind = j.value("kind", "");
  if (config.kind != "openai" && config.kind != "gemini" && config.kind != "mock")
    throw config_error("provider kind must be openai, gemini, or mock (got \"" + config.kind + "\")");
  config.base_url = j.value("base_url", "");
  config.model = j.value("model", "");
  config.api_key_env = j.value("api_key_env", "");
  if (j.contains("mock_rules")) config.mock_rules = j.at("mock_rules");
  if (config.kind != "mock") {
    if (config.base_url.empty()) throw config_error("provider config: base_url required");
    if (config.model.empty()) throw config_error("provider config: model required");
    if (config.api_key_env.empty()) throw config_error("provider config: api_key_env required");
  }
  return config;
}

ProviderConfig ProviderConfig::from_json_text(std::string_view text) {
  return from_json(parse_json(text, "provider config"));
}

json ProviderConfig::to_json() const {
  json j = json::object();
  j["kind"] = kind;
  j["base_url"] = base_url;
  j["model"] = model;
  j["api_key_env"] = api_key_env;
  if (kind == "mock") j["mock_rules"] = mock_rules;
  return j;
}

std::string request_fingerprint(const std::string& provider_id, std::string_view prompt,
                                const std::optional<std::string>& image_digest,
                                ModalityConfig modality) {
  std::string material;
  material.reserve(prompt.size() + 128);
  material += kFingerprintScheme;
  material += '\x1f';
  material += provider_id;
  material += '\x1f';
  material += prompt;
  material += '\x1f';
  material += image_digest ? *image_digest : "-";
  material += '\x1f';
  material += modality_name(modality);
  return sha256_hex(material);
}

Cassette::Cassette(std::filesystem::path path, CassetteMode mode)
    : path_(std::move(path)), mode_(mode) {
  std::ifstream in(path_);
  if (!in) {
    // Missing file is an empty cassette; in replay mode every request then
    // fails with the fingerprint it needed.
    return;
  }
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = parse_json(line, "cassette " + path_.string() + " line " + std::to_string(lineno));
    entries_.emplace(j.at("fingerprint").get<std::string>(), j.at("response").get<std::string>());
  }
}

std::optional<std::string> Cassette::lookup(const std::string& fingerprint) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(fingerprint);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Cassette::append(const std::string& fingerprint, const std::string& response) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(fingerprint, response).second) return;  // first entry wins
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw io_error("cannot append to cassette " + path_.string());
  json j = json::object();
  j["fingerprint"] = fingerprint;
  j["response"] = response;
  out << j.dump() << "\n";
}

size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

WireRequest Provider::build_request(const UniformRequest&) const {
  throw usage_error("provider " + id() + " does not build wire requests");
}

std::string Provider::parse_response(const std::string&) const {
  throw usage_error("provider " + id() + " does not parse wire responses");
}

std::string Provider::respond(const UniformRequest&) const {
  throw usage_error("provider " + id() + " is not an offline provider");
}

// Token bucket: capacity and refill rate both `per_minute`.
struct Gateway::RateLimiter {
  explicit RateLimiter(int per_minute)
      : per_minute_(per_minute), tokens_(per_minute), last_(std::chrono::steady_clock::now()) {}

  void acquire() {
    std::unique_lock lock(mu_);
    for (;;) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      double needed = 1.0 - tokens_;
      auto wait = std::chrono::duration<double>(needed * 60.0 / per_minute_);
      cv_.wait_for(lock, wait);
    }
  }

  void refill() {
    auto now = std::chrono::steady_clock::now();
    double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min<double>(per_minute_, tokens_ + elapsed * per_minute_ / 60.0);
  }

  std::mutex mu_;
  std::condition_variable cv_;
  int per_minute_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

Gateway::Gateway(ProviderConfig config, GatewayOptions options, std::shared_ptr<Cassette> cassette,
                 std::unique_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      options_(options),
      cassette_(std::move(cassette)),
      transport_(std::move(transport)) {
  provider_ = make_provider(config_, options_);
  provider_id_ = provider_->id();
  if (provider_->is_live() && !transport_) transport_ = make_httplib_transport();
  limiter_ = std::make_unique<RateLimiter>(std::max(1, options_.rate_limit_per_minute));
}

Gateway::~Gateway() = default;

std::string Gateway::complete(const std::string& prompt,
                              const std::optional<std::vector<std::uint8_t>>& image,
                              ModalityConfig modality) {
  if (!modality.valid())
    throw usage_error("modality must send text, image, or both");
  if (modality.send_image && (!image || image->empty()))
    throw usage_error("image modality requested but no image provided");
  if (prompt.empty()) throw usage_error("prompt must be non-empty");

  std::optional<std::string> image_digest;
  if (modality.send_image) image_digest = sha256_hex(*image);
  std::string fp = request_fingerprint(provider_id_, prompt, image_digest, modality);

  if (cassette_ && cassette_->mode() == CassetteMode::replay) {
    if (auto hit = cassette_->lookup(fp)) return *hit;
    throw cassette_miss_error("cassette miss for fingerprint " + fp);
  }

  UniformRequest request{prompt, std::nullopt, modality};
  if (modality.send_image) request.image = *image;

  std::string response;
  if (provider_->is_live()) {
    response = call_live(request);
  } else {
    response = provider_->respond(request);
  }
  if (trim(response).empty())
    throw transport_error("provider " + provider_id_ + " returned an empty response");

  if (cassette_ && cassette_->mode() == CassetteMode::record) cassette_->append(fp, response);
  return response;
}

std::string Gateway::call_live(const UniformRequest& request) {
  UniformRequest bounded = request;
  if (bounded.image)
    bounded.image = bound_image_long_edge(*bounded.image, options_.image_max_long_edge);

  WireRequest wire = provider_->build_request(bounded);
  int attempts = std::max(1, options_.max_retries + 1);
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::milliseconds(options_.backoff_base_ms) * (1LL << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    limiter_->acquire();
    try {
      live_calls_.fetch_add(1);
      std::string body = transport_->post(wire);
      return provider_->parse_response(body);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::transport) throw;
      last_error = e.what();
    }
  }
  throw transport_error("provider " + provider_id_ + " failed after " + std::to_string(attempts) +
                        " attempts: " + last_error);
}

}  // namespace medrex
