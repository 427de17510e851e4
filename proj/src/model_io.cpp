#include <sstream>

#include "json.hpp"

#include "vui/error.hpp"
#include "vui/model.hpp"
#include "vui/text.hpp"

namespace vui::model {

using nlohmann::json;

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

std::string BehaviorModel::to_dot() const {
  std::ostringstream out;
  out << "digraph behavior_model {\n";
  out << "  rankdir=LR;\n";
  for (const auto& s : states_) {
    out << "  s" << s.id.value << " [label=\"" << dot_escape(s.label) << "\", shape="
        << (s.is_final ? "doublecircle" : "circle");
    if (s.is_confusion) out << ", style=dashed";
    out << "];\n";
  }
  for (const auto& t : transitions_) {
    out << "  s" << t.from.value << " -> s" << t.to.value << " [label=\"" << dot_escape(t.input)
        << " ×" << t.count << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string BehaviorModel::to_json() const {
  json j;
  j["states"] = json::array();
  for (const auto& s : states_) {
    j["states"].push_back({{"id", s.id.value},
                           {"label", s.label},
                           {"variants", s.variants},
                           {"is_final", s.is_final},
                           {"is_confusion", s.is_confusion}});
  }
  j["inputs"] = json::object();
  for (const auto& [sid, records] : inputs_) {
    json arr = json::array();
    for (const auto& r : records) {
      arr.push_back({{"phrase", r.phrase},
                     {"count", r.invocation_count},
                     {"validity", to_string(r.validity)},
                     {"origin", to_string(r.origin)}});
    }
    j["inputs"][std::to_string(sid.value)] = std::move(arr);
  }
  j["transitions"] = json::array();
  for (const auto& t : transitions_) {
    j["transitions"].push_back({{"from", t.from.value}, {"input", t.input}, {"to", t.to.value}, {"count", t.count}});
  }
  j["initial"] = initial().value;
  json finals = json::array();
  for (StateId f : this->finals()) finals.push_back(f.value);
  j["finals"] = std::move(finals);
  return j.dump(2);
}

BehaviorModel BehaviorModel::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model JSON must be an object");

  BehaviorModel m;
  m.states_.clear();
  m.index_.clear();

  const auto states = require<json>(j, "states", "$");
  if (!states.is_array() || states.empty()) throw ParseError("$.states: expected non-empty array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string where = "$.states[" + std::to_string(i) + "]";
    State s;
    s.id = StateId{require<std::uint32_t>(states[i], "id", where)};
    if (s.id.value != i) throw ParseError(where + ".id: ids must be dense and ordered");
    s.label = require<std::string>(states[i], "label", where);
    s.variants = require<std::vector<std::string>>(states[i], "variants", where);
    s.is_final = require<bool>(states[i], "is_final", where);
    s.is_confusion = require<bool>(states[i], "is_confusion", where);
    m.states_.push_back(std::move(s));
  }
  if (m.states_.front().label != kStartLabel) throw ParseError("$.states[0]: initial state must be <START>");
  if (require<std::uint32_t>(j, "initial", "$") != 0) throw ParseError("$.initial: must be 0");

  for (const auto& s : m.states_) {
    m.index_.emplace(text::normalize(s.label), s.id);
    for (const auto& v : s.variants) m.index_.emplace(text::normalize(v), s.id);
  }

  const auto inputs = require<json>(j, "inputs", "$");
  if (!inputs.is_object()) throw ParseError("$.inputs: expected object");
  for (const auto& [key, arr] : inputs.items()) {
    const std::string where = "$.inputs." + key;
    std::uint32_t id = 0;
    try {
      std::size_t used = 0;
      id = static_cast<std::uint32_t>(std::stoul(key, &used));
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError(where + ": key is not a state id");
    }
    if (!arr.is_array()) throw ParseError(where + ": expected array");
    auto& records = m.inputs_[StateId{id}];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + "[" + std::to_string(i) + "]";
      InputEventRecord r;
      r.phrase = require<std::string>(arr[i], "phrase", w);
      r.invocation_count = require<std::uint32_t>(arr[i], "count", w);
      r.validity = parse_validity(require<std::string>(arr[i], "validity", w));
      r.origin = parse_origin(require<std::string>(arr[i], "origin", w));
      records.push_back(std::move(r));
    }
  }

  const auto transitions = require<json>(j, "transitions", "$");
  if (!transitions.is_array()) throw ParseError("$.transitions: expected array");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const std::string where = "$.transitions[" + std::to_string(i) + "]";
    Transition t;
    t.from = StateId{require<std::uint32_t>(transitions[i], "from", where)};
    t.input = require<std::string>(transitions[i], "input", where);
    t.to = StateId{require<std::uint32_t>(transitions[i], "to", where)};
    t.count = require<std::uint32_t>(transitions[i], "count", where);
    m.transitions_.push_back(std::move(t));
  }

  auto finals = require<std::vector<std::uint32_t>>(j, "finals", "$");
  std::vector<StateId> declared;
  for (auto f : finals) declared.push_back(StateId{f});
  if (declared != m.finals()) throw ParseError("$.finals: disagrees with per-state is_final flags");

  if (auto errors = m.validate(); !errors.empty()) throw ParseError("invalid model: " + errors.front());
  return m;
}

}  // namespace vui::model
