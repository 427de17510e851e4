#include "vui/target.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "vui/error.hpp"

namespace vui::target {

namespace {

using nlohmann::json;

}  // namespace

LocalTarget::LocalTarget(std::shared_ptr<const sim::SkillSpec> spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  if (!spec_) throw TargetUnavailable("no skill spec");
  truth_ = std::make_shared<sim::TruthIndex>(*spec_);
}

Reply LocalTarget::open() {
  auto [session, out] = sim::Session::launch(spec_, derive_seed(seed_, "launch:" + std::to_string(launches_)));
  session_.emplace(std::move(session));
  ++launches_;
  rounds_ = 0;
  ended_ = out.ended;
  last_eval_ = out.eval_meta;
  return Reply{std::move(out.text), out.ended, false};
}

Reply LocalTarget::send(std::string_view input) {
  if (!session_ || ended_) throw SessionEnded();
  auto out = session_->respond(input);
  ++rounds_;
  ended_ = out.ended;
  last_eval_ = out.eval_meta;
  return Reply{std::move(out.text), out.ended, false};
}

RemoteTarget::RemoteTarget(std::string url, double timeout_s) : timeout_s_(timeout_s) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TargetUnavailable("target URL must be http(s): " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  base_ = path_start == std::string::npos ? url : url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (timeout_s_ <= 0) throw InvalidArgument("timeout_s must be positive");
}

Reply RemoteTarget::exchange(std::string_view input) {
  httplib::Client client(base_);
  const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s_ * 1000));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const json body = {{"session", session_id_}, {"input", std::string(input)}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read) return Reply{"", true, true};
    throw TargetUnavailable("cannot reach target: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) throw ProtocolError("target answered HTTP " + std::to_string(res->status));
  try {
    const json j = json::parse(res->body);
    return Reply{j.at("output").get<std::string>(), j.value("ended", false), false};
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed target reply: ") + e.what());
  }
}

Reply RemoteTarget::open() {
  session_id_ = "session-" + std::to_string(launches_);
  ++launches_;
  rounds_ = 0;
  ended_ = false;
  Reply r = exchange(model::kLaunchInput);
  ended_ = r.ended;
  return r;
}

Reply RemoteTarget::send(std::string_view input) {
  if (session_id_.empty() || ended_) throw SessionEnded();
  Reply r = exchange(input);
  ++rounds_;
  ended_ = r.ended;
  return r;
}

TargetConfig load_target_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  TargetConfig c;
  const std::string kind = j.value("kind", "local");
  if (kind == "local") {
    c.kind = Kind::Local;
    if (!j.contains("path") || !j["path"].is_string()) throw SchemaError("$.path", "missing field");
    std::filesystem::path spec = j["path"].get<std::string>();
    if (spec.is_relative()) spec = path.parent_path() / spec;
    c.spec_path = spec.string();
  } else if (kind == "remote") {
    c.kind = Kind::Remote;
    if (!j.contains("url") || !j["url"].is_string()) throw SchemaError("$.url", "missing field");
    c.url = j["url"].get<std::string>();
  } else {
    throw SchemaError("$.kind", "expected \"local\" or \"remote\"");
  }
  if (j.contains("timeout_s")) {
    if (!j["timeout_s"].is_number() || j["timeout_s"].get<double>() <= 0) {
      throw SchemaError("$.timeout_s", "expected a positive number");
    }
    c.timeout_s = j["timeout_s"].get<double>();
  }
  return c;
}

std::unique_ptr<Target> make_target(const TargetConfig& config) {
  if (config.kind == Kind::Remote) return std::make_unique<RemoteTarget>(config.url, config.timeout_s);
  auto spec = std::make_shared<const sim::SkillSpec>(sim::load_spec_file(config.spec_path));
  return std::make_unique<LocalTarget>(std::move(spec), config.seed);
}

}  // namespace vui::target
