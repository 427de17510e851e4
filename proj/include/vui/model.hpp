#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vui::model {

struct StateId {
  std::uint32_t value = 0;
  friend auto operator<=>(const StateId&, const StateId&) = default;
};

enum class Validity { Unknown, Valid, Invalid };
enum class Origin { Gateway, Fallback };

std::string_view to_string(Validity v);
std::string_view to_string(Origin o);
Validity parse_validity(std::string_view s);
Origin parse_origin(std::string_view s);

inline constexpr std::string_view kStartLabel = "<START>";
inline constexpr std::string_view kLaunchInput = "<LAUNCH>";

struct State {
  StateId id;
  std::string label;                  // first output mapped here, never relabeled
  std::vector<std::string> variants;  // raw outputs merged into this state
  bool is_final = false;
  bool is_confusion = false;
  bool operator==(const State&) const = default;
};

struct InputEventRecord {
  std::string phrase;
  std::uint32_t invocation_count = 0;
  Validity validity = Validity::Unknown;
  Origin origin = Origin::Gateway;
  bool operator==(const InputEventRecord&) const = default;
};

struct Transition {
  StateId from;
  std::string input;
  StateId to;
  std::uint32_t count = 0;
  bool operator==(const Transition&) const = default;
};

// The five-tuple (Q, Sigma, delta, s0, F) with per-state input bookkeeping.
//
// States are never removed, so a StateId is also the index of the state in
// states(). Variant lookup is whitespace-normalized and case-insensitive.
// A model is confined to one test session; it has no internal locking.
class BehaviorModel {
 public:
  BehaviorModel();

  StateId initial() const noexcept { return StateId{0}; }
  const std::vector<State>& states() const noexcept { return states_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  std::size_t size() const noexcept { return states_.size(); }

  bool contains(StateId id) const noexcept { return id.value < states_.size(); }
  const State& state(StateId id) const;
  std::vector<StateId> finals() const;

  // Owning state of a label or any merged variant.
  std::optional<StateId> find_state(std::string_view text) const;
  StateId ensure_state(std::string_view label);
  void merge_output(std::string_view raw_output, StateId into);

  void mark_final(StateId id);
  void mark_confusion(StateId id);

  // Appends a never-invoked input event to Sigma(state). Returns false when
  // the phrase is already present.
  bool add_input(StateId state, std::string_view phrase, Origin origin);

  // One observed round: `input` sent from `from` produced `raw_output`,
  // resolved to `to`. Bumps the invocation count and the transition count.
  // Validity becomes Valid when `to` is a distinct non-confusion state;
  // a first invocation that does not get there is marked Invalid.
  void record_interaction(StateId from, std::string_view input, std::string_view raw_output,
                          StateId to);

  // Overrides the stored validity. Unknown is reserved for never-invoked
  // inputs, so Valid/Invalid on a count-0 input and Unknown on an invoked one
  // are rejected.
  void set_validity(StateId state, std::string_view input, Validity v);

  std::vector<InputEventRecord> sigma(StateId state) const;
  std::vector<Transition> delta_from(StateId state) const;
  const InputEventRecord* find_input(StateId state, std::string_view phrase) const;

  // Invariant violations, empty when the model is consistent.
  std::vector<std::string> validate() const;

  std::string to_dot() const;
  std::string to_json() const;
  static BehaviorModel from_json(std::string_view text);

  bool operator==(const BehaviorModel& other) const;

 private:
  State& mutable_state(StateId id);
  InputEventRecord& mutable_input(StateId state, std::string_view phrase);
  void index_variant(const std::string& text, StateId id);

  std::vector<State> states_;
  std::map<StateId, std::vector<InputEventRecord>> inputs_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::string, StateId> index_;
};

}  // namespace vui::model
