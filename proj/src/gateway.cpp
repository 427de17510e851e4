#include <chrono>
#include <thread>

#include "vui/error.hpp"
#include "vui/llm.hpp"
#include "vui/text.hpp"

namespace vui::llm {

namespace {

constexpr int kAttempts = 3;

std::size_t chars_of(std::span<const ChatMessage> messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += m.text.size();
  return n;
}

std::string strip_quotes(std::string_view s) {
  s = text::trim(s);
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'') ||
                           (s.front() == '`' && s.back() == '`'))) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

}  // namespace

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Perfect: return "perfect";
    case BackendKind::Noisy: return "noisy";
    case BackendKind::Remote: return "remote";
  }
  return "perfect";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "perfect") return BackendKind::Perfect;
  if (s == "noisy") return BackendKind::Noisy;
  if (s == "remote") return BackendKind::Remote;
  throw InvalidArgument("unknown backend '" + std::string(s) + "' (expected perfect, noisy or remote)");
}

void GatewayConfig::validate() const {
  if (error_rate < 0.0 || error_rate > 1.0) throw InvalidArgument("error_rate must be within [0, 1]");
  if (temperature < 0.0 || temperature > 2.0) throw InvalidArgument("temperature must be within [0, 2]");
  if (max_feedback_rounds < 0) throw InvalidArgument("max_feedback_rounds must be non-negative");
  if (request_timeout_s <= 0.0) throw InvalidArgument("request_timeout_s must be positive");
  if (retry_backoff_ms < 0) throw InvalidArgument("retry_backoff_ms must be non-negative");
  if (requests_per_minute < 0) throw InvalidArgument("requests_per_minute must be non-negative");
  if (backend == BackendKind::Remote && endpoint.empty()) throw InvalidArgument("remote backend needs an endpoint");
}

std::span<const ChatMessage> Session::window() const {
  return std::span<const ChatMessage>(transcript_).subspan(window_start_);
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Backend> backend, TemplateSet templates)
    : config_(std::move(config)), backend_(std::move(backend)), templates_(std::move(templates)) {
  config_.validate();
  if (!backend_) throw InvalidArgument("gateway needs a backend");
}

Session Gateway::open_session(Phase phase, std::uint64_t tag) const {
  return Session(phase, derive_seed(config_.seed, std::string(to_string(phase)) + ":" + std::to_string(tag)));
}

std::string Gateway::complete(Session& session, std::vector<ChatMessage> delta, const RequestContext& context) {
  const auto window = session.window();
  if (config_.context_limit_chars > 0 && chars_of(window) + chars_of(delta) > config_.context_limit_chars) {
    throw ContextOverflow("request of " + std::to_string(chars_of(window) + chars_of(delta)) +
                          " chars exceeds the context limit");
  }
  std::vector<ChatMessage> messages(window.begin(), window.end());
  messages.insert(messages.end(), delta.begin(), delta.end());

  std::string reply;
  for (int attempt = 1;; ++attempt) {
    try {
      reply = backend_->reply(Request{session.phase(), messages, context, session.rng_});
      break;
    } catch (const BackendUnavailable&) {
      if (attempt >= kAttempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms) * (1 << (attempt - 1)));
    }
  }
  for (auto& m : delta) session.transcript_.push_back(std::move(m));
  session.transcript_.push_back(ChatMessage{Role::Assistant, reply});
  ++session.calls_;
  return reply;
}

std::string parse_output_line(std::string_view reply) {
  const std::string lower = text::to_lower(reply);
  const auto pos = lower.rfind("output:");
  std::string_view rest = pos == std::string::npos ? reply : reply.substr(pos + 7);
  rest = text::trim(rest);
  const auto nl = rest.find('\n');
  if (nl != std::string_view::npos) rest = rest.substr(0, nl);
  return strip_quotes(rest);
}

std::vector<std::string> parse_phrase_list(std::string_view reply) {
  const auto open = reply.find('[');
  const auto close = reply.rfind(']');
  std::string_view body = reply;
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    body = reply.substr(open + 1, close - open - 1);
  } else {
    const std::string lower = text::to_lower(reply);
    const auto pos = lower.rfind("output:");
    if (pos != std::string::npos) body = reply.substr(pos + 7);
  }

  std::vector<std::string> items;
  bool quoted_any = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char q = body[i];
    if (q != '"' && q != '\'') continue;
    std::string item;
    std::size_t j = i + 1;
    bool closed = false;
    for (; j < body.size(); ++j) {
      const char c = body[j];
      if (c == '\\' && j + 1 < body.size()) {
        item += body[++j];
        continue;
      }
      // An apostrophe inside a single-quoted word ("today's") is not a
      // closing quote unless a separator follows.
      if (c == q) {
        std::size_t k = j + 1;
        while (k < body.size() && body[k] == ' ') ++k;
        if (k == body.size() || body[k] == ',' || q == '"') {
          closed = true;
          break;
        }
      }
      item += c;
    }
    if (!closed) break;
    quoted_any = true;
    items.push_back(item);
    i = j;
  }
  if (quoted_any) return items;

  for (std::size_t start = 0; start <= body.size();) {
    auto comma = body.find(',', start);
    if (comma == std::string_view::npos) comma = body.size();
    auto item = text::trim(body.substr(start, comma - start));
    if (!item.empty()) items.emplace_back(item);
    start = comma + 1;
  }
  return items;
}

}  // namespace vui::llm
