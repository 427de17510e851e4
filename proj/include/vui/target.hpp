#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "vui/simulator.hpp"

namespace vui::target {

enum class Kind { Local, Remote };

struct Reply {
  std::string text;
  bool ended = false;
  bool timed_out = false;  // the app stopped answering; treated as ended
};

// A conversation with the app under test. One object is one test session;
// open() starts a fresh conversation each time it is called.
class Target {
 public:
  virtual ~Target() = default;

  virtual Kind kind() const noexcept = 0;
  virtual Reply open() = 0;                         // throws TargetUnavailable
  virtual Reply send(std::string_view input) = 0;   // throws SessionEnded, ProtocolError
  virtual void close() {}

  // Replies received in the current conversation, the opening one excluded.
  int rounds() const noexcept { return rounds_; }
  bool ended() const noexcept { return ended_; }
  int launches() const noexcept { return launches_; }

  // Scoring channel: ground truth for the last reply. Only targets backed
  // by a skill specification have one.
  virtual std::optional<sim::EvalMeta> last_eval() const { return std::nullopt; }
  // The hidden truth index, or null.
  virtual std::shared_ptr<const llm::TruthOracle> truth() const { return nullptr; }

 protected:
  int rounds_ = 0;
  bool ended_ = false;
  int launches_ = 0;
};

class LocalTarget : public Target {
 public:
  // Launch k draws its utterance variants from derive_seed(seed, k).
  LocalTarget(std::shared_ptr<const sim::SkillSpec> spec, std::uint64_t seed);

  Kind kind() const noexcept override { return Kind::Local; }
  Reply open() override;
  Reply send(std::string_view input) override;
  std::optional<sim::EvalMeta> last_eval() const override { return last_eval_; }
  std::shared_ptr<const llm::TruthOracle> truth() const override { return truth_; }
  const sim::SkillSpec& spec() const noexcept { return *spec_; }

 private:
  std::shared_ptr<const sim::SkillSpec> spec_;
  std::shared_ptr<const sim::TruthIndex> truth_;
  std::uint64_t seed_;
  std::optional<sim::Session> session_;
  std::optional<sim::EvalMeta> last_eval_;
};

// JSON over HTTP: POST {"session": id, "input": text} answered with
// {"output": text, "ended": bool}. Opening sends the launch token.
class RemoteTarget : public Target {
 public:
  RemoteTarget(std::string url, double timeout_s);

  Kind kind() const noexcept override { return Kind::Remote; }
  Reply open() override;
  Reply send(std::string_view input) override;

 private:
  Reply exchange(std::string_view input);

  std::string base_;
  std::string path_;
  double timeout_s_;
  std::string session_id_;
};

struct TargetConfig {
  Kind kind = Kind::Local;
  std::string spec_path;  // Local
  std::string url;        // Remote
  double timeout_s = 15.0;
  std::uint64_t seed = 0;
};

// {"kind": "local", "path": spec file} or {"kind": "remote", "url": ..., "timeout_s": ...}.
// Relative spec paths resolve against the config file's directory.
TargetConfig load_target_config(const std::filesystem::path& path);
std::unique_ptr<Target> make_target(const TargetConfig& config);

}  // namespace vui::target
