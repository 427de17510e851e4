#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vui/model.hpp"
#include "vui/rng.hpp"

namespace vui::llm {

enum class Role { System, User, Assistant };

struct ChatMessage {
  Role role = Role::User;
  std::string text;
  bool operator==(const ChatMessage&) const = default;
};

std::string_view to_string(Role r);

// Chat is the unguided chatbot baseline; it has no templates.
enum class Phase { Extraction, Generation, Exploration, Chat };
enum class PromptKind { Long, Short, Feedback };

enum class FeedbackLabel {
  NoStateError,
  NotMergeSuggestion,
  ShouldMergeSuggestion,
  EmptyError,
  InvalidSuggestion,
  NoInputError,
  BetterInputSuggestion,
};

std::string_view to_string(Phase p);
std::string_view to_string(PromptKind k);
std::string_view to_string(FeedbackLabel l);
Phase phase_of(FeedbackLabel l);

// ---------------------------------------------------------------------------
// Templates

struct DeltaLine {
  std::string state;
  std::string input;
  std::string next_state;
};

struct SigmaLine {
  std::string input;
  std::uint32_t count = 0;
  model::Validity validity = model::Validity::Unknown;
};

using PhraseList = std::vector<std::string>;
using SlotValue = std::variant<std::string, PhraseList, std::vector<DeltaLine>, std::vector<SigmaLine>>;
using Slots = std::map<std::string, SlotValue, std::less<>>;

// The closed set of placeholder names a template body may use.
std::span<const std::string_view> placeholder_names();

class PromptTemplate {
 public:
  // Throws TemplateError when the body uses an unknown placeholder or a long
  // template lacks {few_shots}.
  PromptTemplate(Phase phase, PromptKind kind, std::string body,
                 std::optional<FeedbackLabel> label = std::nullopt);

  Phase phase() const noexcept { return phase_; }
  PromptKind kind() const noexcept { return kind_; }
  std::optional<FeedbackLabel> label() const noexcept { return label_; }
  const std::string& body() const noexcept { return body_; }
  // Distinct placeholders in order of first appearance.
  const std::vector<std::string>& placeholders() const noexcept { return placeholders_; }

 private:
  Phase phase_;
  PromptKind kind_;
  std::optional<FeedbackLabel> label_;
  std::string body_;
  std::vector<std::string> placeholders_;
};

// Substitutes every placeholder. Lists render as ["a", "b"], delta as lines
// "delta(state, input) = next_state", sigma as lines
// "input (invoked k times, validity)". Throws MissingSlot.
std::string render(const PromptTemplate& tmpl, const Slots& slots);

// All prompt texts for the three phases. Defaults are compiled in; a
// directory of UTF-8 files can override any of them:
//   <phase>.long.txt, <phase>.short.txt, <phase>.few_shots.txt,
//   <phase>.feedback.<label>.txt
class TemplateSet {
 public:
  static TemplateSet defaults();
  static TemplateSet load_dir(const std::filesystem::path& dir);
  void save_dir(const std::filesystem::path& dir) const;

  const PromptTemplate& prompt(Phase phase, PromptKind kind) const;
  const PromptTemplate& feedback(FeedbackLabel label) const;
  const std::string& few_shots(Phase phase) const;

  // (file name, content) pairs in a stable order.
  std::vector<std::pair<std::string, std::string>> files() const;

 private:
  void set_file(const std::string& name, std::string content);

  std::map<std::pair<Phase, PromptKind>, PromptTemplate> prompts_;
  std::map<FeedbackLabel, PromptTemplate> feedback_;
  std::map<Phase, std::string> few_shots_;
};

// ---------------------------------------------------------------------------
// Backends

enum class BackendKind { Perfect, Noisy, Remote };
std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct GatewayConfig {
  BackendKind backend = BackendKind::Perfect;
  std::string endpoint;
  std::string model_name = "gpt-4";
  double temperature = 0.0;
  std::uint64_t seed = 0;
  double error_rate = 0.0;
  int max_feedback_rounds = 3;
  double request_timeout_s = 60.0;
  int retry_backoff_ms = 500;
  int requests_per_minute = 0;  // 0 disables rate limiting
  std::size_t context_limit_chars = 0;  // 0 disables the local context check

  // Throws InvalidArgument when a bound is violated.
  void validate() const;
};

// What a backend may know about a request beyond its rendered text. Mock
// backends answer from this; the remote backend only sees the messages.
struct ExtractionContext {
  std::string raw_output;
  std::vector<std::string> candidate_inputs;
  const model::BehaviorModel* model = nullptr;
  std::optional<model::StateId> prev_state;
  std::string prev_input;
};

struct GenerationContext {
  std::string raw_output;
};

struct ExplorationContext {
  const model::BehaviorModel* model = nullptr;
  model::StateId state;
};

struct ChatContext {
  std::string app_output;
};

using RequestContext = std::variant<ExtractionContext, GenerationContext, ExplorationContext, ChatContext>;

struct Request {
  Phase phase;
  std::span<const ChatMessage> messages;  // context window sent to the model
  const RequestContext& context;
  Rng& rng;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // May throw BackendUnavailable (retried by the gateway) or ContextOverflow.
  virtual std::string reply(const Request& request) = 0;
};

// Hidden ground truth used by the perfect extraction oracle: which
// semantic state an app output belongs to.
class TruthOracle {
 public:
  virtual ~TruthOracle() = default;
  virtual std::optional<std::string> truth_of(std::string_view output) const = 0;
};

// Kinds of deliberately wrong answers the noisy backend can give. Each one is
// caught by exactly one checker branch.
enum class Fault {
  OutOfSetState,      // -> NoStateError
  WrongMerge,         // -> NotMergeSuggestion
  RawEchoWhenMerge,   // -> ShouldMergeSuggestion
  EmptyInputs,        // -> EmptyError
  OverlongInputs,     // -> EmptyError (all items dropped by normalization)
  OutOfSetSelection,  // -> NoInputError
  SuboptimalSelection // -> BetterInputSuggestion
};
std::string_view to_string(Fault f);

// The correct answer for each phase, as the perfect backend renders it.
std::string perfect_reply(const Request& request, const TruthOracle* truth);

// Applicable faults for a request, in catalog order.
std::vector<Fault> applicable_faults(const Request& request, const TruthOracle* truth);
std::string faulty_reply(const Request& request, Fault fault, const TruthOracle* truth);

class PerfectBackend : public Backend {
 public:
  explicit PerfectBackend(std::shared_ptr<const TruthOracle> truth = nullptr) : truth_(std::move(truth)) {}
  std::string reply(const Request& request) override;

 private:
  std::shared_ptr<const TruthOracle> truth_;
};

class NoisyBackend : public Backend {
 public:
  NoisyBackend(double error_rate, std::shared_ptr<const TruthOracle> truth = nullptr);
  std::string reply(const Request& request) override;

 private:
  double error_rate_;
  std::shared_ptr<const TruthOracle> truth_;
};

// Chat-completion JSON over HTTP(S): {model, messages[{role, content}],
// temperature}. The bearer token comes from ELEVATE_API_KEY.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(GatewayConfig config);
  std::string reply(const Request& request) override;

  // Request body for the given messages; exposed for wire-format tests.
  std::string encode_request(std::span<const ChatMessage> messages) const;
  // First message content of a chat-completion response. Throws ProtocolError.
  static std::string decode_reply(std::string_view body);

 private:
  void throttle();

  GatewayConfig config_;
  std::mutex rate_mutex_;
  std::int64_t next_slot_us_ = 0;
};

std::shared_ptr<Backend> make_backend(const GatewayConfig& config,
                                      std::shared_ptr<const TruthOracle> truth = nullptr);

// ---------------------------------------------------------------------------
// Sessions

// One chat history for one phase of one app session. The transcript is
// append-only; after a context overflow the window sent to the backend
// restarts, but earlier messages stay in the transcript.
class Session {
 public:
  Phase phase() const noexcept { return phase_; }
  const std::vector<ChatMessage>& transcript() const noexcept { return transcript_; }
  std::span<const ChatMessage> window() const;
  bool long_prompt_used() const noexcept { return long_prompt_used_; }
  void mark_long_prompt_used() noexcept { long_prompt_used_ = true; }
  std::size_t calls() const noexcept { return calls_; }

  // Drops everything before the next message from the backend's view.
  void restart_window() noexcept {
    window_start_ = transcript_.size();
    long_prompt_used_ = false;
  }

 private:
  friend class Gateway;
  Session(Phase phase, std::uint64_t seed) : phase_(phase), rng_(seed) {}

  Phase phase_;
  Rng rng_;
  std::vector<ChatMessage> transcript_;
  std::size_t window_start_ = 0;
  std::size_t calls_ = 0;
  bool long_prompt_used_ = false;
};

// Shareable across parallel test sessions: all mutable per-dialogue state
// lives in Session objects.
class Gateway {
 public:
  Gateway(GatewayConfig config, std::shared_ptr<Backend> backend,
          TemplateSet templates = TemplateSet::defaults());

  const GatewayConfig& config() const noexcept { return config_; }
  const TemplateSet& templates() const noexcept { return templates_; }

  // Per-session randomness derives from (config seed, phase, tag).
  Session open_session(Phase phase, std::uint64_t tag = 0) const;

  // Appends `delta`, asks the backend, appends and returns the reply.
  // BackendUnavailable is retried up to three attempts with backoff.
  // ContextOverflow is raised before anything is appended.
  std::string complete(Session& session, std::vector<ChatMessage> delta, const RequestContext& context);

 private:
  GatewayConfig config_;
  std::shared_ptr<Backend> backend_;
  TemplateSet templates_;
};

// Reply parsing shared by the phases.
// Text after the last "Output:" marker (or the whole reply), trimmed and
// stripped of surrounding quotes.
std::string parse_output_line(std::string_view reply);
// Items of a bracketed list of quoted phrases; tolerant of python-style
// single quotes. Unquoted comma-separated items are accepted as a fallback.
std::vector<std::string> parse_phrase_list(std::string_view reply);

}  // namespace vui::llm
