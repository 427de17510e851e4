#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vui/model.hpp"

namespace vui::llm {
class Gateway;
class Session;
}  // namespace vui::llm

namespace vui::explore {

struct ThoughtTrace {
  std::string step1;
  std::string step2;
  std::string step3;
  std::string chosen;  // the "Output:" line
  bool operator==(const ThoughtTrace&) const = default;
};

// Splits a reply into its step1/step2/step3 reasoning and the chosen input.
ThoughtTrace parse_thought(std::string_view reply);

struct SelectVerdict {
  enum class Kind { Accept, NoInputError, BetterInputSuggestion };
  Kind kind = Kind::Accept;
  std::string better;  // suggested input for BetterInputSuggestion
  bool operator==(const SelectVerdict&) const = default;
};

std::string to_string(const SelectVerdict& v);

// Rejects a choice outside Sigma, or one for which a less-invoked valid or
// unexplored input exists (any such input beats an invalid choice). The
// suggestion is the least-invoked alternative, earliest on ties.
SelectVerdict better_input_checker(std::string_view chosen, std::span<const model::InputEventRecord> sigma);
SelectVerdict better_input_checker(std::string_view chosen, model::StateId state, const model::BehaviorModel& m);

// Least-invoked input that is not known to be invalid, earliest on ties;
// the least-invoked invalid one when nothing else is left.
std::string fallback_select(std::span<const model::InputEventRecord> sigma);

struct SelectionResult {
  std::string phrase;  // canonical spelling from Sigma
  ThoughtTrace trace;  // reasoning behind the accepted choice (empty on fallback)
  std::vector<ThoughtTrace> rejected;
  std::vector<SelectVerdict> verdicts;  // one per gateway reply
  int feedback_rounds = 0;
  int llm_calls = 0;
  bool used_fallback = false;
};

// Sigma(state) must not be empty.
SelectionResult select_input(model::StateId state, const model::BehaviorModel& model, llm::Gateway& gateway,
                             llm::Session& session);

}  // namespace vui::explore
