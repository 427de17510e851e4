#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vui/llm.hpp"
#include "vui/model.hpp"
#include "vui/rng.hpp"

namespace vui::sim {

struct SpecTransition {
  std::vector<std::string> patterns;  // exact replies, matched after normalization
  std::string to;
};

struct SpecFallback {
  std::vector<std::string> utterances;
  std::string to;
};

struct SpecState {
  std::string id;
  std::vector<std::string> utterances;  // paraphrase variants
  std::vector<SpecTransition> transitions;
  std::optional<SpecFallback> fallback;
  bool is_final = false;
};

// A scripted voice skill. Unmatched replies at a non-final state take the
// fallback; the fallback texts are confusion responses.
struct SkillSpec {
  std::string name;
  std::string invocation;
  std::string initial;
  std::vector<SpecState> states;

  const SpecState& state(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
};

// Throws SchemaError with the JSON path of the first problem.
SkillSpec load_spec(std::string_view json_text);
SkillSpec load_spec_file(const std::filesystem::path& path);
std::string to_json(const SkillSpec& spec);

// Out-of-band facts for scoring only; never shown to a tester.
struct EvalMeta {
  std::string truth_state;
  bool was_fallback = false;
};

struct AppOutput {
  std::string text;
  bool ended = false;
  EvalMeta eval_meta;
};

class Session {
 public:
  // Starts at the initial state; utterance variants are drawn from `seed`.
  static std::pair<Session, AppOutput> launch(std::shared_ptr<const SkillSpec> spec, std::uint64_t seed);

  AppOutput respond(std::string_view input);  // throws SessionEnded
  bool ended() const noexcept { return ended_; }
  const std::string& current() const noexcept { return current_; }
  int rounds() const noexcept { return rounds_; }

 private:
  Session(std::shared_ptr<const SkillSpec> spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {}
  AppOutput enter(const SpecState& s, std::string text, bool fallback);

  std::shared_ptr<const SkillSpec> spec_;
  Rng rng_;
  std::string current_;
  bool ended_ = false;
  int rounds_ = 0;
};

// One model state per spec state plus <START>. Every utterance and every
// fallback text is a variant of the state it leads to; every spec transition
// is recorded once.
model::BehaviorModel ground_truth(const SkillSpec& spec);

// Maps any text the skill can say to the spec state it stands for.
class TruthIndex : public llm::TruthOracle {
 public:
  explicit TruthIndex(const SkillSpec& spec);
  std::optional<std::string> truth_of(std::string_view output) const override;

 private:
  std::unordered_map<std::string, std::string> by_text_;
};

struct CorpusOptions {
  std::uint64_t seed = 42;
  int count = 10;
  std::pair<int, int> states{5, 15};     // spec states per skill
  std::pair<int, int> variants{2, 4};    // utterances per state
  std::pair<int, int> branching{2, 4};   // out-degree of non-final states
};

// Deterministic synthetic skills with a mix of question types. Every state
// is reachable and at least one final state exists.
std::vector<SkillSpec> gen_corpus(const CorpusOptions& options);

}  // namespace vui::sim
