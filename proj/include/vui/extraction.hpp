#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vui/model.hpp"

namespace vui::llm {
class Gateway;
class Session;
}  // namespace vui::llm

namespace vui::extract {

struct StateDecision {
  enum class Kind { MergedInto, NewState };
  Kind kind = Kind::NewState;
  model::StateId target;  // MergedInto only
  std::string label;      // NewState only

  static StateDecision merged_into(model::StateId id) { return {Kind::MergedInto, id, {}}; }
  static StateDecision new_state(std::string label) { return {Kind::NewState, {}, std::move(label)}; }
  bool operator==(const StateDecision&) const = default;
};

struct FilterVerdict {
  enum class Kind { Accept, NoStateError, NotMergeSuggestion, ShouldMergeSuggestion };
  Kind kind = Kind::Accept;
  std::optional<model::StateId> state;  // merge target for ShouldMergeSuggestion
  bool operator==(const FilterVerdict&) const = default;
};

std::string to_string(const FilterVerdict& v);

struct FilterOptions {
  // Two states count as having the same input events when the Jaccard
  // similarity of their normalized phrase sets reaches this value.
  double same_inputs_threshold = 0.5;
};

// Jaccard similarity of two phrase sets after normalization; 1 for two
// empty sets.
double input_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b);

std::vector<std::string> sigma_phrases(const model::BehaviorModel& m, model::StateId s);

// Rule-based check of one candidate answer, in this order: candidate outside
// the state set and not the output itself; candidate state with different
// input events; output proposed as new while the previous transition already
// reached a state; accept.
FilterVerdict state_filter(std::string_view candidate, std::string_view raw_output,
                           const model::BehaviorModel& model, std::optional<model::StateId> prev_state,
                           std::string_view prev_input, const std::vector<std::string>& candidate_inputs,
                           const FilterOptions& options = {});

struct ExtractionRequest {
  std::string raw_output;
  std::vector<std::string> candidate_inputs;
  std::optional<model::StateId> prev_state;
  std::string prev_input;
  bool confusion = false;  // output is a confusion response
};

struct ExtractionResult {
  StateDecision decision;
  std::vector<std::string> candidates;  // parsed answer per gateway reply
  std::vector<FilterVerdict> verdicts;  // one per candidate
  int feedback_rounds = 0;
  int llm_calls = 0;
  bool used_fallback = false;
};

// Maps the output to an existing state or a new one. After the feedback
// budget is spent the output opens a new state, except that confusion
// responses join an existing confusion state with the same input events.
ExtractionResult extract_state(const ExtractionRequest& request, const model::BehaviorModel& model,
                               llm::Gateway& gateway, llm::Session& session, const FilterOptions& options = {});

// Applies a decision: merges the output or creates the state.
model::StateId apply_decision(model::BehaviorModel& model, const StateDecision& decision,
                              std::string_view raw_output);

}  // namespace vui::extract
