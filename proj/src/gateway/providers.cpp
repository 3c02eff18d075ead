#include <cstdlib>
#include <regex>
#include <sstream>

#include "common/errors.hpp"
#include "common/strings.hpp"
#include "gateway/gateway.hpp"
#include "prompt/prompt.hpp"

namespace medrex {

namespace {

// Splits "https://host:port/base/path" into host part and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw config_error("base_url must include a scheme: " + base_url);
  auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string path = base_url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {base_url.substr(0, path_start), path};
}

std::string require_api_key(const ProviderConfig& config) {
  const char* key = std::getenv(config.api_key_env.c_str());
  if (!key || !*key)
    throw config_error("environment variable " + config.api_key_env +
                       " is not set (required by provider " + config.id() + ")");
  return key;
}

class OpenAiProvider : public Provider {
 public:
  OpenAiProvider(ProviderConfig config, GatewayOptions options)
      : config_(std::move(config)), options_(options), api_key_(require_api_key(config_)) {
    std::tie(host_, base_path_) = split_base_url(config_.base_url);
  }

  std::string id() const override { return config_.id(); }
  bool is_live() const override { return true; }

  WireRequest build_request(const UniformRequest& request) const override {
    json body = json::object();
    body["model"] = config_.model;
    body["temperature"] = 0;
    body["seed"] = options_.decoding_seed;
    json messages = json::array();
    if (request.image) {
      json content = json::array();
      content.push_back({{"type", "text"}, {"text", request.prompt}});
      std::string mime = sniff_image_mime(*request.image);
      content.push_back(
          {{"type", "image_url"},
           {"image_url", {{"url", "data:" + mime + ";base64," + to_base64(*request.image)}}}});
      messages.push_back({{"role", "user"}, {"content", content}});
    } else {
      messages.push_back({{"role", "user"}, {"content", request.prompt}});
    }
    body["messages"] = messages;

    WireRequest wire;
    wire.host = host_;
    wire.path = base_path_ + "/chat/completions";
    wire.headers = {{"Authorization", "Bearer " + api_key_}, {"Content-Type", "application/json"}};
    wire.body = body.dump();
    return wire;
  }

  std::string parse_response(const std::string& body) const override {
    json j = parse_json(body, "openai response");
    if (j.contains("error"))
      throw transport_error("openai error: " + j.at("error").value("message", "unknown"));
    if (!j.contains("choices") || j.at("choices").empty())
      throw transport_error("openai response has no choices");
    const auto& message = j.at("choices")[0].at("message");
    const auto& content = message.at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    for (const auto& part : content)
      if (part.value("type", "") == "text") out += part.value("text", "");
    return out;
  }

 private:
  ProviderConfig config_;
  GatewayOptions options_;
  std::string api_key_;
  std::string host_;
  std::string base_path_;
};

class GeminiProvider : public Provider {
 public:
  GeminiProvider(ProviderConfig config, GatewayOptions options)
      : config_(std::move(config)), options_(options), api_key_(require_api_key(config_)) {
    std::tie(host_, base_path_) = split_base_url(config_.base_url);
  }

  std::string id() const override { return config_.id(); }
  bool is_live() const override { return true; }

  WireRequest build_request(const UniformRequest& request) const override {
    json parts = json::array();
    parts.push_back({{"text", request.prompt}});
    if (request.image) {
      parts.push_back({{"inline_data",
                        {{"mime_type", sniff_image_mime(*request.image)},
                         {"data", to_base64(*request.image)}}}});
    }
    json body = json::object();
    body["generationConfig"] = {{"temperature", 0}, {"seed", options_.decoding_seed}};
    body["contents"] = json::array({json{{"role", "user"}, {"parts", parts}}});

    WireRequest wire;
    wire.host = host_;
    wire.path = base_path_ + "/models/" + config_.model + ":generateContent";
    wire.headers = {{"x-goog-api-key", api_key_}, {"Content-Type", "application/json"}};
    wire.body = body.dump();
    return wire;
  }

  std::string parse_response(const std::string& body) const override {
    json j = parse_json(body, "gemini response");
    if (j.contains("error"))
      throw transport_error("gemini error: " + j.at("error").value("message", "unknown"));
    if (!j.contains("candidates") || j.at("candidates").empty())
      throw transport_error("gemini response has no candidates");
    std::string out;
    for (const auto& part : j.at("candidates")[0].at("content").at("parts"))
      if (part.contains("text")) out += part.at("text").get<std::string>();
    return out;
  }

 private:
  ProviderConfig config_;
  GatewayOptions options_;
  std::string api_key_;
  std::string host_;
  std::string base_path_;
};

// Offline provider scripted by substitution rules, for end-to-end tests with
// no cassette and no network. Rules run in order; the first applicable one
// answers:
//   {"kind":"echo"}                                  -> prompt inside a fence
//   {"kind":"replace","match":RE,"respond":TPL}      -> regex format expansion
//   {"kind":"extract_records","pattern":RE,...}      -> records block from
//       per-line captures (key_group/value_group/unit_group, fixed scenario_id)
class ScriptedMockProvider : public Provider {
 public:
  explicit ScriptedMockProvider(ProviderConfig config) : config_(std::move(config)) {
    for (const auto& rule : config_.mock_rules) {
      Rule r;
      r.kind = rule.value("kind", "echo");
      if (r.kind == "replace") {
        r.pattern = std::regex(rule.at("match").get<std::string>());
        r.respond = rule.at("respond").get<std::string>();
      } else if (r.kind == "extract_records") {
        r.pattern = std::regex(rule.at("pattern").get<std::string>());
        r.scenario_id = rule.value("scenario_id", "unknown");
        r.key_group = rule.value("key_group", 1);
        r.value_group = rule.value("value_group", 2);
        r.unit_group = rule.value("unit_group", 0);
      } else if (r.kind != "echo") {
        throw config_error("unknown mock rule kind \"" + r.kind + "\"");
      }
      rules_.push_back(std::move(r));
    }
  }

  std::string id() const override { return config_.id(); }
  bool is_live() const override { return false; }

  std::string respond(const UniformRequest& request) const override {
    for (const auto& rule : rules_) {
      if (rule.kind == "echo") return fence_block(request.prompt);
      if (rule.kind == "replace") {
        std::smatch m;
        if (std::regex_search(request.prompt, m, rule.pattern)) return m.format(rule.respond);
        continue;
      }
      // extract_records
      std::vector<RawRecord> records;
      std::istringstream lines(request.prompt);
      std::string line;
      while (std::getline(lines, line)) {
        std::smatch m;
        if (!std::regex_search(line, m, rule.pattern)) continue;
        RawRecord r;
        r.scenario_id = rule.scenario_id;
        r.key = m[static_cast<size_t>(rule.key_group)].str();
        r.value = m[static_cast<size_t>(rule.value_group)].str();
        if (rule.unit_group > 0 && m[static_cast<size_t>(rule.unit_group)].matched)
          r.unit = m[static_cast<size_t>(rule.unit_group)].str();
        records.push_back(std::move(r));
      }
      return render_extraction_response(records);
    }
    return fence_block(request.prompt);
  }

 private:
  struct Rule {
    std::string kind;
    std::regex pattern;
    std::string respond;
    std::string scenario_id;
    int key_group = 1;
    int value_group = 2;
    int unit_group = 0;
  };
  ProviderConfig config_;
  std::vector<Rule> rules_;
};

}  // namespace

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, const GatewayOptions& options) {
  if (config.kind == "openai") return std::make_unique<OpenAiProvider>(config, options);
  if (config.kind == "gemini") return std::make_unique<GeminiProvider>(config, options);
  if (config.kind == "mock") return std::make_unique<ScriptedMockProvider>(config);
  throw config_error("unknown provider kind \"" + config.kind + "\"");
}

}  // namespace medrex
