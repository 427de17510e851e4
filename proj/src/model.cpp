#include "vui/model.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "vui/error.hpp"
#include "vui/text.hpp"

namespace vui::model {

std::string_view to_string(Validity v) {
  switch (v) {
    case Validity::Unknown: return "unknown";
    case Validity::Valid: return "valid";
    case Validity::Invalid: return "invalid";
  }
  return "unknown";
}

std::string_view to_string(Origin o) { return o == Origin::Gateway ? "gateway" : "fallback"; }

Validity parse_validity(std::string_view s) {
  if (s == "unknown") return Validity::Unknown;
  if (s == "valid") return Validity::Valid;
  if (s == "invalid") return Validity::Invalid;
  throw ParseError("bad validity: " + std::string(s));
}

Origin parse_origin(std::string_view s) {
  if (s == "gateway") return Origin::Gateway;
  if (s == "fallback") return Origin::Fallback;
  throw ParseError("bad origin: " + std::string(s));
}

BehaviorModel::BehaviorModel() {
  states_.push_back(State{StateId{0}, std::string(kStartLabel), {}, false, false});
  index_variant(states_.front().label, StateId{0});
}

const State& BehaviorModel::state(StateId id) const {
  if (!contains(id)) throw UnknownState("#" + std::to_string(id.value));
  return states_[id.value];
}

State& BehaviorModel::mutable_state(StateId id) {
  if (!contains(id)) throw UnknownState("#" + std::to_string(id.value));
  return states_[id.value];
}

std::vector<StateId> BehaviorModel::finals() const {
  std::vector<StateId> out;
  for (const auto& s : states_) {
    if (s.is_final) out.push_back(s.id);
  }
  return out;
}

void BehaviorModel::index_variant(const std::string& text, StateId id) {
  index_.emplace(text::normalize(text), id);
}

std::optional<StateId> BehaviorModel::find_state(std::string_view text) const {
  auto it = index_.find(text::normalize(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateId BehaviorModel::ensure_state(std::string_view label) {
  if (text::trim(label).empty()) throw EmptyLabel();
  if (auto existing = find_state(label)) return *existing;
  StateId id{static_cast<std::uint32_t>(states_.size())};
  std::string l(text::trim(label));
  states_.push_back(State{id, l, {l}, false, false});
  index_variant(l, id);
  return id;
}

void BehaviorModel::merge_output(std::string_view raw_output, StateId into) {
  State& target = mutable_state(into);
  if (text::trim(raw_output).empty()) throw EmptyLabel();
  if (auto owner = find_state(raw_output)) {
    if (*owner == into) {
      // Already indexed (as label or variant); only the initial state's label
      // lives outside the variants list.
      const std::string key = text::normalize(raw_output);
      const bool listed = std::any_of(target.variants.begin(), target.variants.end(),
                                      [&](const std::string& v) { return text::normalize(v) == key; });
      if (!listed && into != initial()) target.variants.emplace_back(text::trim(raw_output));
      return;
    }
    throw VariantConflict("output already belongs to state #" + std::to_string(owner->value));
  }
  target.variants.emplace_back(text::trim(raw_output));
  index_variant(target.variants.back(), into);
}

void BehaviorModel::mark_final(StateId id) { mutable_state(id).is_final = true; }

void BehaviorModel::mark_confusion(StateId id) { mutable_state(id).is_confusion = true; }

bool BehaviorModel::add_input(StateId state, std::string_view phrase, Origin origin) {
  (void)mutable_state(state);
  if (text::trim(phrase).empty()) throw InvalidArgument("empty input phrase");
  if (find_input(state, phrase)) return false;
  inputs_[state].push_back(InputEventRecord{std::string(text::trim(phrase)), 0, Validity::Unknown, origin});
  return true;
}

const InputEventRecord* BehaviorModel::find_input(StateId state, std::string_view phrase) const {
  auto it = inputs_.find(state);
  if (it == inputs_.end()) return nullptr;
  const std::string key = text::normalize(phrase);
  for (const auto& rec : it->second) {
    if (text::normalize(rec.phrase) == key) return &rec;
  }
  return nullptr;
}

InputEventRecord& BehaviorModel::mutable_input(StateId state, std::string_view phrase) {
  (void)mutable_state(state);
  auto* rec = find_input(state, phrase);
  if (!rec) throw UnknownInput(std::string(phrase) + " at state #" + std::to_string(state.value));
  return const_cast<InputEventRecord&>(*rec);
}

void BehaviorModel::record_interaction(StateId from, std::string_view input,
                                       std::string_view raw_output, StateId to) {
  (void)mutable_state(to);
  InputEventRecord& rec = mutable_input(from, input);
  rec.invocation_count += 1;

  auto it = std::find_if(transitions_.begin(), transitions_.end(), [&](const Transition& t) {
    return t.from == from && t.to == to && text::normalize(t.input) == text::normalize(rec.phrase);
  });
  if (it != transitions_.end()) {
    it->count += 1;
  } else {
    transitions_.push_back(Transition{from, rec.phrase, to, 1});
  }

  if (!text::trim(raw_output).empty() && !find_state(raw_output)) merge_output(raw_output, to);

  const bool progressed = to != from && !states_[to.value].is_confusion;
  if (progressed) {
    rec.validity = Validity::Valid;
  } else if (rec.validity == Validity::Unknown) {
    rec.validity = Validity::Invalid;
  }
}

void BehaviorModel::set_validity(StateId state, std::string_view input, Validity v) {
  InputEventRecord& rec = mutable_input(state, input);
  if (v == Validity::Unknown && rec.invocation_count > 0) {
    throw InvalidArgument("an invoked input cannot be reset to unknown validity");
  }
  if (v != Validity::Unknown && rec.invocation_count == 0) {
    throw InvalidArgument("validity of a never-invoked input stays unknown");
  }
  rec.validity = v;
}

std::vector<InputEventRecord> BehaviorModel::sigma(StateId state) const {
  (void)this->state(state);
  auto it = inputs_.find(state);
  if (it == inputs_.end()) return {};
  return it->second;
}

std::vector<Transition> BehaviorModel::delta_from(StateId state) const {
  (void)this->state(state);
  std::vector<Transition> out;
  for (const auto& t : transitions_) {
    if (t.from == state) out.push_back(t);
  }
  return out;
}

std::vector<std::string> BehaviorModel::validate() const {
  std::vector<std::string> errors;
  auto err = [&](std::string msg) { errors.push_back(std::move(msg)); };

  if (states_.empty() || states_.front().label != kStartLabel) err("initial state missing");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const State& s = states_[i];
    const std::string tag = "state #" + std::to_string(i);
    if (s.id.value != i) err(tag + ": id does not match position");
    if (text::trim(s.label).empty()) err(tag + ": empty label");
    if (i != 0 && s.variants.empty()) err(tag + ": no variants");
    for (const auto& v : s.variants) {
      const std::string key = text::normalize(v);
      if (!seen.insert(key).second) err(tag + ": variant owned twice: " + v);
      auto it = index_.find(key);
      if (it == index_.end() || it->second != s.id) err(tag + ": variant not indexed: " + v);
    }
    auto it = index_.find(text::normalize(s.label));
    if (it == index_.end() || it->second != s.id) err(tag + ": label not indexed");
  }

  for (const auto& [sid, records] : inputs_) {
    if (!contains(sid)) {
      err("inputs keyed by unknown state #" + std::to_string(sid.value));
      continue;
    }
    std::set<std::string> phrases;
    for (const auto& rec : records) {
      const std::string tag = "input '" + rec.phrase + "' at #" + std::to_string(sid.value);
      if (!phrases.insert(text::normalize(rec.phrase)).second) err(tag + ": duplicate");
      if ((rec.validity == Validity::Unknown) != (rec.invocation_count == 0)) {
        err(tag + ": validity/count mismatch");
      }
      std::uint32_t observed = 0;
      for (const auto& t : transitions_) {
        if (t.from == sid && text::normalize(t.input) == text::normalize(rec.phrase)) observed += t.count;
      }
      if (observed != rec.invocation_count) err(tag + ": count differs from transitions");
    }
  }

  for (const auto& t : transitions_) {
    const std::string tag = "transition #" + std::to_string(t.from.value) + " -" + t.input + "-> #" +
                            std::to_string(t.to.value);
    if (!contains(t.from) || !contains(t.to)) err(tag + ": endpoint outside Q");
    if (t.count == 0) err(tag + ": zero count");
    if (contains(t.from) && !find_input(t.from, t.input)) err(tag + ": input not in Sigma(from)");
  }
  return errors;
}

bool BehaviorModel::operator==(const BehaviorModel& other) const {
  if (states_ != other.states_ || transitions_ != other.transitions_) return false;
  // Treat an absent Sigma entry and an empty one alike.
  auto non_empty = [](const auto& m) {
    std::map<StateId, std::vector<InputEventRecord>> out;
    for (const auto& [k, v] : m) {
      if (!v.empty()) out.emplace(k, v);
    }
    return out;
  };
  return non_empty(inputs_) == non_empty(other.inputs_);
}

}  // namespace vui::model
