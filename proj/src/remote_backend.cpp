#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "vui/error.hpp"
#include "vui/llm.hpp"

namespace vui::llm {

namespace {

using nlohmann::json;

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("endpoint must be an http(s) URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RemoteBackend::RemoteBackend(GatewayConfig config) : config_(std::move(config)) {
  config_.validate();
  (void)split_endpoint(config_.endpoint);
}

std::string RemoteBackend::encode_request(std::span<const ChatMessage> messages) const {
  json body;
  body["model"] = config_.model_name;
  body["temperature"] = config_.temperature;
  body["messages"] = json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.text}});
  }
  return body.dump();
}

std::string RemoteBackend::decode_reply(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed completion response: ") + e.what());
  }
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProtocolError("completion response lacks choices[0].message.content");
  }
}

void RemoteBackend::throttle() {
  if (config_.requests_per_minute <= 0) return;
  const std::int64_t interval = 60'000'000 / config_.requests_per_minute;
  std::int64_t slot = 0;
  {
    std::lock_guard lock(rate_mutex_);
    slot = std::max(now_us(), next_slot_us_);
    next_slot_us_ = slot + interval;
  }
  const std::int64_t wait = slot - now_us();
  if (wait > 0) std::this_thread::sleep_for(std::chrono::microseconds(wait));
}

std::string RemoteBackend::reply(const Request& request) {
  throttle();
  const Endpoint ep = split_endpoint(config_.endpoint);
  httplib::Client client(ep.base);
  const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(config_.request_timeout_s * 1000));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (const char* key = std::getenv("ELEVATE_API_KEY"); key && *key) client.set_bearer_token_auth(key);

  auto res = client.Post(ep.path, encode_request(request.messages), "application/json");
  if (!res) throw BackendUnavailable("request failed: " + httplib::to_string(res.error()));
  if (res->status == 400 && res->body.find("context_length") != std::string::npos) {
    throw ContextOverflow("backend rejected the request: context length exceeded");
  }
  if (res->status != 200) throw BackendUnavailable("backend answered HTTP " + std::to_string(res->status));
  try {
    return decode_reply(res->body);
  } catch (const ProtocolError& e) {
    throw BackendUnavailable(e.what());
  }
}

}  // namespace vui::llm
