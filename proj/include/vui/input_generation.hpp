#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vui/model.hpp"

namespace vui::llm {
class Gateway;
class Session;
}  // namespace vui::llm

namespace vui::inputs {

// Surface question patterns of app outputs. The last three are the mixed
// patterns: instruction + selection, wh + selection, yes-no + selection.
enum class QuestionType {
  YesNo,
  Selection,
  Instruction,
  Wh,
  InstructionSelection,
  WhSelection,
  YesNoSelection,
  Other,
};

std::string_view to_string(QuestionType t);
bool is_mixed(QuestionType t);

// Editable parser configuration: phrase length bound, the "what <noun>"
// lexicon (noun -> sample answer) and the confusion phrase list.
struct ParserConfig {
  std::size_t max_words = 5;
  std::vector<std::pair<std::string, std::string>> noun_lexicon;
  std::vector<std::string> confusion_phrases;

  static const ParserConfig& defaults();

  // Overrides the lists from UTF-8 files: "noun:answer" per line, and one
  // confusion phrase per line. Blank lines and lines starting with '#' are
  // skipped. Either path may be empty to keep the default.
  static ParserConfig load(const std::filesystem::path& lexicon_file,
                           const std::filesystem::path& confusion_file);

  static std::string lexicon_file_text(const ParserConfig& c);
  static std::string confusion_file_text(const ParserConfig& c);
};

QuestionType classify_question(std::string_view raw_output);

// Deterministic replies per question type: phrases after say/ask (quoted
// phrases win when present), selection conjuncts, yes/no, the lexicon answer
// for "what <noun>", salient content phrases otherwise. Lowercased,
// deduplicated, at most max_words words each, in textual order. Never empty.
std::vector<std::string> rule_based_inputs(std::string_view raw_output,
                                           const ParserConfig& config = ParserConfig::defaults());

// Lowercase, trim, strip wrapping punctuation; drop empty and over-long
// items (never truncate); deduplicate keeping first occurrence.
std::vector<std::string> normalize_inputs(const std::vector<std::string>& items, std::size_t max_words);

bool is_confusion_response(std::string_view output, const ParserConfig& config = ParserConfig::defaults());

struct InputCheck {
  enum class Kind { Ok, EmptyError, InvalidSuggestion };
  Kind kind = Kind::Ok;
  std::string input;  // offending phrase for InvalidSuggestion

  static InputCheck ok() { return {}; }
  static InputCheck empty_error() { return {Kind::EmptyError, {}}; }
  static InputCheck invalid(std::string phrase) { return {Kind::InvalidSuggestion, std::move(phrase)}; }
  bool operator==(const InputCheck&) const = default;
};

std::string to_string(const InputCheck& c);

struct GenerationResult {
  std::vector<std::string> inputs;
  model::Origin origin = model::Origin::Gateway;
  std::vector<InputCheck> verdicts;  // one per gateway reply
  int feedback_rounds = 0;
  int llm_calls = 0;
  bool used_fallback = false;
};

// Asks the gateway for the replies to `raw_output`. When `invalid_input` is
// set, the request opens with the invalid-suggestion feedback for it. Empty
// parses are answered with the empty-error feedback up to the configured
// number of rounds, after which the rule-based inputs are returned.
GenerationResult generate_inputs(std::string_view raw_output, llm::Gateway& gateway, llm::Session& session,
                                 const ParserConfig& config = ParserConfig::defaults(),
                                 const std::optional<std::string>& invalid_input = std::nullopt);

// Invalid-suggestion feedback waiting for the next generation call at a
// state.
class FeedbackQueue {
 public:
  void push(model::StateId state, std::string input);
  std::optional<std::string> pop(model::StateId state);
  bool has(model::StateId state) const;

 private:
  std::map<model::StateId, std::vector<std::string>> pending_;
};

// Post-hoc check of the input just sent from `state`: invalid when the next
// state is the same state or the next output is a confusion response. Stores
// the validity in the model and, on invalid, queues the feedback.
InputCheck check_input_outcome(model::BehaviorModel& model, model::StateId state, std::string_view input,
                               model::StateId next_state, std::string_view next_raw_output,
                               FeedbackQueue* queue = nullptr,
                               const ParserConfig& config = ParserConfig::defaults());

// Verdict part of check_input_outcome, without touching the model.
InputCheck judge_input_outcome(model::StateId state, std::string_view input, model::StateId next_state,
                               std::string_view next_raw_output, const ParserConfig& config);

}  // namespace vui::inputs
