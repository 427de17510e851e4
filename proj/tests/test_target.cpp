#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "vui/error.hpp"
#include "vui/target.hpp"

using namespace vui;
using namespace vui::target;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const char* name) { return fs::path(VUI_SOURCE_DIR) / "fixtures" / name; }

// Echo app: answers "you said <input>", ends on "bye", stalls on "wait".
class EchoServer {
 public:
  EchoServer() {
    server_.Post("/talk", [this](const httplib::Request& req, httplib::Response& res) {
      const auto j = json::parse(req.body);
      const std::string input = j.at("input");
      sessions_.push_back(j.at("session"));
      if (input == "wait") std::this_thread::sleep_for(std::chrono::milliseconds(600));
      if (input == "broken") {
        res.set_content("not json", "application/json");
        return;
      }
      if (input == "fail") {
        res.status = 500;
        return;
      }
      res.set_content(json{{"output", "you said " + input}, {"ended", input == "bye"}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~EchoServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/talk"; }
  std::vector<std::string> sessions_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(LocalTargetTest, ConversationAndEval) {
  auto spec = std::make_shared<const sim::SkillSpec>(sim::load_spec_file(fixture("pet_buddy.json")));
  LocalTarget t(spec, 3);
  const auto first = t.open();
  EXPECT_FALSE(first.ended);
  EXPECT_EQ(t.last_eval()->truth_state, "welcome");
  EXPECT_EQ(t.send("play").text.find("fetch") != std::string::npos, true);
  EXPECT_EQ(t.rounds(), 1);
  ASSERT_TRUE(t.truth());
  EXPECT_EQ(t.truth()->truth_of(first.text), "welcome");
  t.send("tug");
  t.send("goodbye");
  EXPECT_TRUE(t.ended());
  EXPECT_THROW(t.send("hi"), SessionEnded);
  t.open();
  EXPECT_EQ(t.launches(), 2);
  EXPECT_EQ(t.rounds(), 0);
}

TEST(LocalTargetTest, LaunchesDrawDifferentVariants) {
  auto spec = std::make_shared<const sim::SkillSpec>(sim::load_spec_file(fixture("pet_buddy.json")));
  LocalTarget a(spec, 5);
  LocalTarget b(spec, 5);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(a.open().text, b.open().text);
}

TEST(RemoteTargetTest, LoopbackConversation) {
  EchoServer server;
  RemoteTarget t(server.url(), 0.3);
  EXPECT_EQ(t.open().text, "you said <LAUNCH>");
  EXPECT_EQ(t.send("hello").text, "you said hello");
  EXPECT_TRUE(t.send("bye").ended);
  EXPECT_THROW(t.send("again"), SessionEnded);
  t.open();
  EXPECT_EQ(server.sessions_.front(), "session-0");
  EXPECT_EQ(server.sessions_.back(), "session-1");
  EXPECT_FALSE(t.last_eval());
}

TEST(RemoteTargetTest, SlowReplyIsTimeout) {
  EchoServer server;
  RemoteTarget t(server.url(), 0.2);
  t.open();
  const auto r = t.send("wait");
  EXPECT_TRUE(r.timed_out);
  EXPECT_TRUE(r.ended);
  EXPECT_TRUE(t.ended());
}

TEST(RemoteTargetTest, BadRepliesAreProtocolErrors) {
  EchoServer server;
  RemoteTarget t(server.url(), 1.0);
  t.open();
  EXPECT_THROW(t.send("broken"), ProtocolError);
  EXPECT_THROW(t.send("fail"), ProtocolError);
}

TEST(RemoteTargetTest, UnreachableAndBadUrl) {
  RemoteTarget t("http://127.0.0.1:9/", 0.5);
  EXPECT_THROW(t.open(), TargetUnavailable);
  EXPECT_THROW(RemoteTarget("localhost:80", 1.0), TargetUnavailable);
  EXPECT_THROW(RemoteTarget("http://x/", 0), InvalidArgument);
}

TEST(TargetConfigTest, LoadsShippedConfig) {
  const auto c = load_target_config(fixture("local_target.json"));
  EXPECT_EQ(c.kind, Kind::Local);
  EXPECT_EQ(fs::path(c.spec_path), fixture("pet_buddy.json"));
  EXPECT_EQ(c.timeout_s, 15.0);
  auto t = make_target(c);
  EXPECT_EQ(t->kind(), Kind::Local);
  EXPECT_FALSE(t->open().text.empty());
}

TEST(TargetConfigTest, SchemaErrors) {
  const fs::path p = fs::temp_directory_path() / "vui_target_cfg.json";
  auto path_of = [&](const std::string& body) -> std::string {
    std::ofstream(p) << body;
    try {
      load_target_config(p);
    } catch (const SchemaError& e) {
      return e.path();
    }
    return "";
  };
  EXPECT_EQ(path_of(R"({"kind":"ftp"})"), "$.kind");
  EXPECT_EQ(path_of(R"({"kind":"remote"})"), "$.url");
  EXPECT_EQ(path_of(R"({"kind":"local","path":"x.json","timeout_s":-1})"), "$.timeout_s");
  EXPECT_EQ(path_of("[1]"), "$");
  EXPECT_THROW(load_target_config("/nonexistent/cfg.json"), InvalidArgument);
}
