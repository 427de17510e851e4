#include "vui/simulator.hpp"

#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "vui/error.hpp"
#include "vui/input_generation.hpp"
#include "vui/text.hpp"

namespace vui::sim {

namespace {

using nlohmann::json;

std::string path_of(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw SchemaError(where + "." + key, "missing field");
  return j.at(key);
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_string() || text::trim(v.get<std::string>()).empty()) {
    throw SchemaError(where + "." + key, "expected a non-empty string");
  }
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  const std::string here = where + "." + key;
  if (!v.is_array() || v.empty()) throw SchemaError(here, "expected a non-empty array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string() || text::trim(v[i].get<std::string>()).empty()) {
      throw SchemaError(path_of(here, i), "expected a non-empty string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

// Reply matching ignores case, spacing and trailing punctuation.
std::string reply_key(std::string_view s) {
  std::string n = text::normalize(s);
  while (!n.empty() && (n.back() == '.' || n.back() == '!' || n.back() == '?' || n.back() == ',')) n.pop_back();
  return std::string(text::trim(n));
}

void check_spec(const SkillSpec& spec) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    if (!ids.insert(spec.states[i].id).second) {
      throw SchemaError(path_of("$.states", i) + ".id", "duplicate state id '" + spec.states[i].id + "'");
    }
  }
  if (!ids.count(spec.initial)) throw SchemaError("$.initial", "unknown state '" + spec.initial + "'");

  std::unordered_map<std::string, std::string> owner;
  auto claim = [&](const std::string& text, const std::string& state, const std::string& where) {
    auto [it, fresh] = owner.emplace(text::normalize(text), state);
    if (!fresh && it->second != state) {
      throw SchemaError(where, "text already belongs to state '" + it->second + "'");
    }
  };

  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    const SpecState& s = spec.states[i];
    const std::string where = path_of("$.states", i);
    for (std::size_t k = 0; k < s.utterances.size(); ++k) claim(s.utterances[k], s.id, path_of(where + ".utterances", k));
    if (s.is_final && !s.transitions.empty()) throw SchemaError(where + ".transitions", "final state has transitions");
    if (!s.is_final && !s.fallback) throw SchemaError(where + ".fallback", "missing field");
    for (std::size_t t = 0; t < s.transitions.size(); ++t) {
      if (!ids.count(s.transitions[t].to)) {
        throw SchemaError(path_of(where + ".transitions", t) + ".to", "unknown state '" + s.transitions[t].to + "'");
      }
    }
    if (s.fallback) {
      if (!ids.count(s.fallback->to)) throw SchemaError(where + ".fallback.to", "unknown state '" + s.fallback->to + "'");
      for (std::size_t k = 0; k < s.fallback->utterances.size(); ++k) {
        const std::string here = path_of(where + ".fallback.utterances", k);
        if (!inputs::is_confusion_response(s.fallback->utterances[k])) {
          throw SchemaError(here, "fallback text must read as a confusion response");
        }
      }
    }
  }
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    const SpecState& s = spec.states[i];
    if (!s.fallback) continue;
    for (std::size_t k = 0; k < s.fallback->utterances.size(); ++k) {
      claim(s.fallback->utterances[k], s.fallback->to, path_of(path_of("$.states", i) + ".fallback.utterances", k));
    }
  }

  std::set<std::string> seen{spec.initial};
  std::deque<std::string> queue{spec.initial};
  bool final_reachable = false;
  while (!queue.empty()) {
    const SpecState& s = spec.state(queue.front());
    queue.pop_front();
    final_reachable |= s.is_final;
    auto visit = [&](const std::string& to) {
      if (seen.insert(to).second) queue.push_back(to);
    };
    for (const auto& t : s.transitions) visit(t.to);
    if (s.fallback) visit(s.fallback->to);
  }
  if (!final_reachable) throw SchemaError("$.states", "no final state is reachable from the initial state");
}

}  // namespace

const SpecState& SkillSpec::state(std::string_view id) const {
  auto i = index_of(id);
  if (!i) throw UnknownState(std::string(id));
  return states[*i];
}

std::optional<std::size_t> SkillSpec::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].id == id) return i;
  }
  return std::nullopt;
}

SkillSpec load_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$", "expected an object");

  SkillSpec spec;
  spec.name = string_field(j, "name", "$");
  spec.invocation = j.contains("invocation") ? string_field(j, "invocation", "$") : "open " + text::to_lower(spec.name);
  spec.initial = string_field(j, "initial", "$");

  const json& states = field(j, "states", "$");
  if (!states.is_array() || states.empty()) throw SchemaError("$.states", "expected a non-empty array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string where = path_of("$.states", i);
    const json& js = states[i];
    if (!js.is_object()) throw SchemaError(where, "expected an object");
    SpecState s;
    s.id = string_field(js, "id", where);
    s.utterances = string_list(js, "utterances", where);
    if (js.contains("is_final")) {
      if (!js.at("is_final").is_boolean()) throw SchemaError(where + ".is_final", "expected a boolean");
      s.is_final = js.at("is_final").get<bool>();
    }
    if (js.contains("transitions")) {
      const json& ts = js.at("transitions");
      if (!ts.is_array()) throw SchemaError(where + ".transitions", "expected an array");
      for (std::size_t t = 0; t < ts.size(); ++t) {
        const std::string tw = path_of(where + ".transitions", t);
        if (!ts[t].is_object()) throw SchemaError(tw, "expected an object");
        s.transitions.push_back(SpecTransition{string_list(ts[t], "patterns", tw), string_field(ts[t], "to", tw)});
      }
    }
    if (js.contains("fallback")) {
      const json& fb = js.at("fallback");
      const std::string fw = where + ".fallback";
      if (!fb.is_object()) throw SchemaError(fw, "expected an object");
      s.fallback = SpecFallback{string_list(fb, "utterances", fw), fb.contains("to") ? string_field(fb, "to", fw) : s.id};
    }
    spec.states.push_back(std::move(s));
  }
  check_spec(spec);
  return spec;
}

SkillSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_spec(ss.str());
}

std::string to_json(const SkillSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["invocation"] = spec.invocation;
  j["initial"] = spec.initial;
  j["states"] = json::array();
  for (const auto& s : spec.states) {
    json js;
    js["id"] = s.id;
    js["utterances"] = s.utterances;
    js["is_final"] = s.is_final;
    if (!s.transitions.empty()) {
      js["transitions"] = json::array();
      for (const auto& t : s.transitions) js["transitions"].push_back({{"patterns", t.patterns}, {"to", t.to}});
    }
    if (s.fallback) js["fallback"] = {{"utterances", s.fallback->utterances}, {"to", s.fallback->to}};
    j["states"].push_back(std::move(js));
  }
  return j.dump(2);
}

std::pair<Session, AppOutput> Session::launch(std::shared_ptr<const SkillSpec> spec, std::uint64_t seed) {
  if (!spec) throw InvalidArgument("no skill spec");
  Session session(spec, seed);
  const SpecState& initial = spec->state(spec->initial);
  const std::string text = initial.utterances[session.rng_.below(initial.utterances.size())];
  AppOutput out = session.enter(initial, text, false);
  return {std::move(session), std::move(out)};
}

AppOutput Session::enter(const SpecState& s, std::string text, bool fallback) {
  current_ = s.id;
  ended_ = s.is_final;
  return AppOutput{std::move(text), ended_, EvalMeta{s.id, fallback}};
}

AppOutput Session::respond(std::string_view input) {
  if (ended_) throw SessionEnded();
  ++rounds_;
  const SpecState& here = spec_->state(current_);
  const std::string key = reply_key(input);
  for (const auto& t : here.transitions) {
    for (const auto& p : t.patterns) {
      if (reply_key(p) == key) {
        const SpecState& next = spec_->state(t.to);
        return enter(next, next.utterances[rng_.below(next.utterances.size())], false);
      }
    }
  }
  const SpecFallback& fb = *here.fallback;
  return enter(spec_->state(fb.to), fb.utterances[rng_.below(fb.utterances.size())], true);
}

model::BehaviorModel ground_truth(const SkillSpec& spec) {
  model::BehaviorModel m;
  std::unordered_map<std::string, model::StateId> id;
  for (const auto& s : spec.states) {
    const model::StateId sid = m.ensure_state(s.utterances.front());
    id.emplace(s.id, sid);
    for (const auto& u : s.utterances) m.merge_output(u, sid);
    if (s.is_final) m.mark_final(sid);
  }
  for (const auto& s : spec.states) {
    if (!s.fallback) continue;
    for (const auto& u : s.fallback->utterances) m.merge_output(u, id.at(s.fallback->to));
  }
  m.add_input(m.initial(), model::kLaunchInput, model::Origin::Fallback);
  m.record_interaction(m.initial(), model::kLaunchInput, "", id.at(spec.initial));
  for (const auto& s : spec.states) {
    const model::StateId from = id.at(s.id);
    for (const auto& t : s.transitions) {
      for (const auto& p : t.patterns) {
        // The first transition listing a reply wins, as in Session::respond.
        if (!m.add_input(from, p, model::Origin::Gateway)) continue;
        m.record_interaction(from, p, "", id.at(t.to));
      }
    }
  }
  return m;
}

TruthIndex::TruthIndex(const SkillSpec& spec) {
  for (const auto& s : spec.states) {
    for (const auto& u : s.utterances) by_text_.emplace(text::normalize(u), s.id);
    if (s.fallback) {
      for (const auto& u : s.fallback->utterances) by_text_.emplace(text::normalize(u), s.fallback->to);
    }
  }
}

std::optional<std::string> TruthIndex::truth_of(std::string_view output) const {
  auto it = by_text_.find(text::normalize(output));
  if (it == by_text_.end()) return std::nullopt;
  return it->second;
}

}  // namespace vui::sim
