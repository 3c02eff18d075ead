#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "common/errors.hpp"
#include "gateway/gateway.hpp"

namespace medrex {

namespace {

bool network_disabled() {
  const char* v = std::getenv("MEDREX_NO_NETWORK");
  return v && *v && std::string_view(v) != "0";
}

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(int timeout_seconds) : timeout_seconds_(timeout_seconds) {}

  std::string post(const WireRequest& request) override {
    if (network_disabled())
      throw transport_error("network access disabled by MEDREX_NO_NETWORK, refusing request to " +
                            request.host);
    httplib::Client client(request.host);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
      if (name == "Content-Type")
        content_type = value;
      else
        headers.emplace(name, value);
    }
    auto result = client.Post(request.path, headers, request.body, content_type);
    if (!result)
      throw transport_error("request to " + request.host + request.path + " failed: " +
                            httplib::to_string(result.error()));
    if (result->status == 429 || result->status >= 500)
      throw transport_error("request to " + request.host + request.path + " returned status " +
                            std::to_string(result->status));
    if (result->status < 200 || result->status >= 300)
      throw transport_error("request to " + request.host + request.path + " rejected with status " +
                            std::to_string(result->status) + ": " + result->body);
    return result->body;
  }

 private:
  int timeout_seconds_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(int timeout_seconds) {
  return std::make_unique<HttplibTransport>(timeout_seconds);
}

}  // namespace medrex
