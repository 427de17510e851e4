#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vui/llm.hpp"

namespace vui::testing {

// Backend answering from a queue of canned replies, then from `otherwise`.
class ScriptedBackend : public llm::Backend {
 public:
  using Fn = std::function<std::string(const llm::Request&)>;

  explicit ScriptedBackend(std::vector<std::string> replies = {}, Fn otherwise = nullptr)
      : queue_(replies.begin(), replies.end()), otherwise_(std::move(otherwise)) {}

  std::string reply(const llm::Request& request) override {
    seen.emplace_back(request.messages.begin(), request.messages.end());
    if (!queue_.empty()) {
      std::string r = queue_.front();
      queue_.pop_front();
      return r;
    }
    if (otherwise_) return otherwise_(request);
    return "Output: ";
  }

  std::vector<std::vector<llm::ChatMessage>> seen;

 private:
  std::deque<std::string> queue_;
  Fn otherwise_;
};

inline llm::GatewayConfig quick_config() {
  llm::GatewayConfig c;
  c.retry_backoff_ms = 0;
  return c;
}

inline llm::Gateway gateway_with(std::shared_ptr<llm::Backend> backend, llm::GatewayConfig config = quick_config()) {
  return llm::Gateway(config, std::move(backend));
}

}  // namespace vui::testing
