#include "vui/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "json.hpp"

#include "vui/error.hpp"
#include "vui/text.hpp"

namespace vui::runner {

namespace {

using nlohmann::json;
using model::Origin;
using model::StateId;

// Timeouts and silent replies share one placeholder state.
constexpr std::string_view kNoResponse = "<NO RESPONSE>";

std::string output_key(const std::string& raw) {
  return text::trim(raw).empty() ? std::string(kNoResponse) : raw;
}

void tally(PhaseStats& s, int llm_calls, int feedback_rounds, bool fallback) {
  ++s.invocations;
  s.llm_calls += llm_calls;
  s.feedback_rounds += feedback_rounds;
  if (fallback) ++s.fallbacks;
}

// Launch and send bookkeeping shared by every tester.
class Driver {
 public:
  Driver(target::Target& target, const Budget& budget, const RunOptions& options, TestReport& report)
      : target_(target), budget_(budget), options_(options), report_(report),
        start_(std::chrono::steady_clock::now()) {}

  int round() const noexcept { return round_; }
  int launch_index() const noexcept { return launches_ - 1; }
  bool needs_launch() const { return launches_ == 0 || target_.ended(); }

  bool has_budget() const {
    if (budget_.max_rounds) return round_ < *budget_.max_rounds;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    return elapsed.count() < *budget_.wall_clock_s;
  }

  std::optional<target::Reply> launch() {
    if (!has_budget()) return stop("budget");
    if (launches_ > 0) {
      if (report_.stats.relaunches >= options_.relaunch_cap) return stop("relaunch_cap");
      ++report_.stats.relaunches;
      target_.close();
    }
    target::Reply r;
    try {
      r = target_.open();
    } catch (const TargetUnavailable&) {
      if (launches_ == 0) throw;
      return stop("target_error");
    } catch (const ProtocolError&) {
      if (launches_ == 0) throw;
      return stop("target_error");
    }
    ++launches_;
    return received(std::move(r));
  }

  std::optional<target::Reply> send(const std::string& input) {
    target::Reply r;
    try {
      r = target_.send(input);
    } catch (const TargetUnavailable&) {
      return stop("target_error");
    } catch (const ProtocolError&) {
      return stop("target_error");
    }
    return received(std::move(r));
  }

  std::nullopt_t stop(const char* reason) {
    if (report_.stop_reason.empty()) report_.stop_reason = reason;
    return std::nullopt;
  }

  void finish() { stop("budget"); }

 private:
  target::Reply received(target::Reply r) {
    ++round_;
    if (r.timed_out) {
      ++report_.stats.timeouts;
      r.ended = true;
    }
    if (auto e = target_.last_eval()) report_.eval.push_back(EvalRecord{round_, e->truth_state, e->was_fallback});
    return r;
  }

  target::Target& target_;
  const Budget& budget_;
  const RunOptions& options_;
  TestReport& report_;
  std::chrono::steady_clock::time_point start_;
  int round_ = 0;
  int launches_ = 0;
};

RoundRecord start_record(int round, StateId from, std::string input, const target::Reply& reply) {
  RoundRecord rec;
  rec.round = round;
  rec.state_before = from;
  rec.input = std::move(input);
  rec.raw_output = reply.text;
  rec.ended = reply.ended;
  rec.timed_out = reply.timed_out;
  return rec;
}

class ElevateLoop {
 public:
  ElevateLoop(TestReport& report, llm::Gateway& gateway, const RunOptions& options)
      : report_(report), m_(report.model), gateway_(gateway), options_(options) {}

  void open_sessions(std::uint64_t tag) {
    extraction_.emplace(gateway_.open_session(llm::Phase::Extraction, tag));
    generation_.emplace(gateway_.open_session(llm::Phase::Generation, tag));
    exploration_.emplace(gateway_.open_session(llm::Phase::Exploration, tag));
  }

  explore::SelectionResult select(StateId s) {
    auto sel = explore::select_input(s, m_, gateway_, *exploration_);
    tally(report_.stats.exploration, sel.llm_calls, sel.feedback_rounds, sel.used_fallback);
    return sel;
  }

  StateId process(RoundRecord rec) {
    const std::string key = output_key(rec.raw_output);
    const bool confusion = inputs::is_confusion_response(rec.raw_output, options_.parser);

    std::vector<std::string> candidates;
    Origin origin = Origin::Gateway;
    if (!rec.ended && key != kNoResponse) {
      const std::string norm = text::normalize(key);
      auto hit = cache_.find(norm);
      if (hit == cache_.end()) {
        auto gen = inputs::generate_inputs(key, gateway_, *generation_, options_.parser);
        tally(report_.stats.generation, gen.llm_calls, gen.feedback_rounds, gen.used_fallback);
        for (const auto& v : gen.verdicts) rec.checker_verdicts.push_back("input_generation:" + inputs::to_string(v));
        hit = cache_.emplace(norm, std::make_pair(gen.inputs, gen.origin)).first;
      }
      candidates = hit->second.first;
      origin = hit->second.second;
    }

    if (auto known = m_.find_state(key)) {
      rec.decision = extract::StateDecision::merged_into(*known);
      rec.source = DecisionSource::ExactMatch;
      ++report_.stats.exact_matches;
    } else {
      extract::ExtractionRequest req{key, candidates, rec.state_before, rec.input, confusion};
      auto ext = extract::extract_state(req, m_, gateway_, *extraction_, options_.filter);
      tally(report_.stats.extraction, ext.llm_calls, ext.feedback_rounds, ext.used_fallback);
      for (const auto& v : ext.verdicts) rec.checker_verdicts.push_back("state_filter:" + extract::to_string(v));
      rec.decision = ext.decision;
      rec.source = ext.used_fallback ? DecisionSource::Fallback : DecisionSource::Gateway;
    }

    const StateId to = extract::apply_decision(m_, rec.decision, key);
    rec.resolved = to;
    if (rec.decision.kind == extract::StateDecision::Kind::NewState && confusion && !m_.state(to).is_confusion) {
      m_.mark_confusion(to);
      rec.marked_confusion = true;
    }
    if (rec.ended && !m_.state(to).is_final) {
      m_.mark_final(to);
      rec.marked_final = true;
    }
    m_.record_interaction(rec.state_before, rec.input, key, to);
    for (const auto& c : candidates) {
      if (m_.add_input(to, c, origin)) rec.inputs_added.push_back(InputAdd{c, origin});
    }

    if (rec.state_before != m_.initial()) {
      auto check = inputs::check_input_outcome(m_, rec.state_before, rec.input, to, key, &queue_, options_.parser);
      rec.validity = m_.find_input(rec.state_before, rec.input)->validity;
      rec.checker_verdicts.push_back("input_checker:" + inputs::to_string(check));
    }

    if (!rec.ended && queue_.has(to)) {
      const auto invalid = queue_.pop(to);
      auto gen = inputs::generate_inputs(key, gateway_, *generation_, options_.parser, invalid);
      tally(report_.stats.generation, gen.llm_calls, gen.feedback_rounds, gen.used_fallback);
      for (const auto& v : gen.verdicts) rec.checker_verdicts.push_back("input_generation:" + inputs::to_string(v));
      for (const auto& p : gen.inputs) {
        if (m_.add_input(to, p, gen.origin)) rec.feedback_inputs.push_back(InputAdd{p, gen.origin});
      }
    }

    report_.transcript.push_back(std::move(rec));
    return to;
  }

 private:
  TestReport& report_;
  model::BehaviorModel& m_;
  llm::Gateway& gateway_;
  const RunOptions& options_;
  std::optional<llm::Session> extraction_;
  std::optional<llm::Session> generation_;
  std::optional<llm::Session> exploration_;
  std::unordered_map<std::string, std::pair<std::vector<std::string>, Origin>> cache_;
  inputs::FeedbackQueue queue_;
};

// Sentence-level model: every distinct output is its own state.
StateId process_sentence(TestReport& report, RoundRecord rec, bool add_rule_inputs, const RunOptions& options) {
  auto& m = report.model;
  const std::string key = output_key(rec.raw_output);
  if (auto known = m.find_state(key)) {
    rec.decision = extract::StateDecision::merged_into(*known);
    rec.source = DecisionSource::ExactMatch;
    ++report.stats.exact_matches;
  } else {
    rec.decision = extract::StateDecision::new_state(key);
    rec.source = DecisionSource::Fallback;
  }
  const StateId to = extract::apply_decision(m, rec.decision, key);
  rec.resolved = to;
  if (rec.ended && !m.state(to).is_final) {
    m.mark_final(to);
    rec.marked_final = true;
  }
  m.record_interaction(rec.state_before, rec.input, key, to);
  if (add_rule_inputs && !rec.ended && key != kNoResponse) {
    for (const auto& p : inputs::rule_based_inputs(key, options.parser)) {
      if (m.add_input(to, p, Origin::Fallback)) rec.inputs_added.push_back(InputAdd{p, Origin::Fallback});
    }
  }
  report.transcript.push_back(std::move(rec));
  return to;
}

std::string weighted_pick(const std::vector<model::InputEventRecord>& sigma) {
  const model::InputEventRecord* best = &sigma.front();
  for (const auto& r : sigma) {
    if (r.invocation_count < best->invocation_count) best = &r;
  }
  return best->phrase;
}

void ensure_inputs(model::BehaviorModel& m, StateId s, std::vector<InputAdd>& pre) {
  if (!m.sigma(s).empty()) return;
  if (m.add_input(s, "help", Origin::Fallback)) pre.push_back(InputAdd{"help", Origin::Fallback});
}

std::uint64_t launch_tag(std::uint64_t seed, int launch) {
  return derive_seed(seed, "launch:" + std::to_string(launch));
}

// --- JSON ---------------------------------------------------------------

json adds_to_json(const std::vector<InputAdd>& adds) {
  json a = json::array();
  for (const auto& x : adds) a.push_back({{"phrase", x.phrase}, {"origin", model::to_string(x.origin)}});
  return a;
}

std::vector<InputAdd> adds_from_json(const json& a) {
  std::vector<InputAdd> out;
  for (const auto& x : a) out.push_back(InputAdd{x.at("phrase").get<std::string>(),
                                                 model::parse_origin(x.at("origin").get<std::string>())});
  return out;
}

json phase_to_json(const PhaseStats& p) {
  return {{"invocations", p.invocations},
          {"llm_calls", p.llm_calls},
          {"feedback_rounds", p.feedback_rounds},
          {"fallbacks", p.fallbacks}};
}

PhaseStats phase_from_json(const json& j) {
  return PhaseStats{j.at("invocations").get<int>(), j.at("llm_calls").get<int>(), j.at("feedback_rounds").get<int>(),
                    j.at("fallbacks").get<int>()};
}

DecisionSource parse_source(std::string_view s) {
  if (s == "exact_match") return DecisionSource::ExactMatch;
  if (s == "gateway") return DecisionSource::Gateway;
  if (s == "fallback") return DecisionSource::Fallback;
  throw ParseError("unknown decision source '" + std::string(s) + "'");
}

class Canonicalizer {
 public:
  Canonicalizer(llm::Gateway& gateway, const RunOptions& options)
      : gateway_(gateway), options_(options), session_(gateway.open_session(llm::Phase::Extraction, 0)) {}

  StateId add(const std::string& sentence, const std::vector<std::string>& inputs) {
    if (auto known = m_.find_state(sentence)) return *known;
    const bool confusion = inputs::is_confusion_response(sentence, options_.parser);
    extract::ExtractionRequest req{sentence, inputs, std::nullopt, "", confusion};
    auto ext = extract::extract_state(req, m_, gateway_, session_, options_.filter);
    const StateId to = extract::apply_decision(m_, ext.decision, sentence);
    if (ext.decision.kind == extract::StateDecision::Kind::NewState) {
      if (confusion) m_.mark_confusion(to);
      for (const auto& p : inputs) m_.add_input(to, p, Origin::Fallback);
    }
    return to;
  }

  const model::BehaviorModel& model() const noexcept { return m_; }

 private:
  llm::Gateway& gateway_;
  const RunOptions& options_;
  llm::Session session_;
  model::BehaviorModel m_;
};

}  // namespace

void Budget::validate() const {
  if (!max_rounds && !wall_clock_s) throw InvalidArgument("a round or wall-clock budget is required");
  if (max_rounds && *max_rounds < 0) throw InvalidArgument("max_rounds must be non-negative");
  if (wall_clock_s && *wall_clock_s <= 0) throw InvalidArgument("wall_clock_s must be positive");
}

int Stats::llm_calls() const {
  return extraction.llm_calls + generation.llm_calls + exploration.llm_calls + chat_calls;
}

int Stats::fallbacks() const { return extraction.fallbacks + generation.fallbacks + exploration.fallbacks; }

int Stats::phase_invocations() const {
  return extraction.invocations + generation.invocations + exploration.invocations;
}

std::string_view to_string(DecisionSource s) {
  switch (s) {
    case DecisionSource::ExactMatch: return "exact_match";
    case DecisionSource::Gateway: return "gateway";
    case DecisionSource::Fallback: return "fallback";
  }
  return "?";
}

std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::Chatbot: return "chatbot";
    case BaselineKind::Random: return "random";
    case BaselineKind::Weighted: return "weighted";
  }
  return "?";
}

BaselineKind parse_baseline_kind(std::string_view s) {
  if (s == "chatbot") return BaselineKind::Chatbot;
  if (s == "random") return BaselineKind::Random;
  if (s == "weighted") return BaselineKind::Weighted;
  throw InvalidArgument("unknown tester '" + std::string(s) + "'");
}

TestReport run_elevate(target::Target& target, llm::Gateway& gateway, const Budget& budget, std::uint64_t seed,
                       const RunOptions& options) {
  budget.validate();
  TestReport report;
  report.tester = "elevate";
  report.seed = seed;
  auto& m = report.model;
  Driver driver(target, budget, options, report);
  ElevateLoop loop(report, gateway, options);

  StateId current = m.initial();
  while (true) {
    if (driver.needs_launch()) {
      auto reply = driver.launch();
      if (!reply) break;
      loop.open_sessions(launch_tag(seed, driver.launch_index()));
      RoundRecord rec = start_record(driver.round(), m.initial(), std::string(model::kLaunchInput), *reply);
      if (m.add_input(m.initial(), model::kLaunchInput, Origin::Fallback)) {
        rec.pre_inputs.push_back(InputAdd{std::string(model::kLaunchInput), Origin::Fallback});
      }
      current = loop.process(std::move(rec));
      continue;
    }
    if (!driver.has_budget()) break;
    std::vector<InputAdd> pre;
    ensure_inputs(m, current, pre);
    auto sel = loop.select(current);
    auto reply = driver.send(sel.phrase);
    if (!reply) break;
    RoundRecord rec = start_record(driver.round(), current, sel.phrase, *reply);
    rec.pre_inputs = std::move(pre);
    for (const auto& v : sel.verdicts) rec.checker_verdicts.push_back("input_selection:" + explore::to_string(v));
    if (!sel.used_fallback) rec.thought_trace = sel.trace;
    current = loop.process(std::move(rec));
  }
  driver.finish();
  return report;
}

TestReport run_baseline(BaselineKind kind, target::Target& target, llm::Gateway* gateway, const Budget& budget,
                        std::uint64_t seed, const RunOptions& options) {
  budget.validate();
  if (kind == BaselineKind::Chatbot && !gateway) throw InvalidArgument("the chatbot tester needs a backend");
  TestReport report;
  report.tester = std::string(to_string(kind));
  report.seed = seed;
  auto& m = report.model;
  Driver driver(target, budget, options, report);
  Rng rng(derive_seed(seed, "baseline:" + report.tester));
  std::optional<llm::Session> chat;
  const bool rule_inputs = kind != BaselineKind::Chatbot;

  StateId current = m.initial();
  std::string last_output;
  while (true) {
    if (driver.needs_launch()) {
      auto reply = driver.launch();
      if (!reply) break;
      if (gateway && kind == BaselineKind::Chatbot) {
        chat.emplace(gateway->open_session(llm::Phase::Chat, launch_tag(seed, driver.launch_index())));
      }
      RoundRecord rec = start_record(driver.round(), m.initial(), std::string(model::kLaunchInput), *reply);
      if (m.add_input(m.initial(), model::kLaunchInput, Origin::Fallback)) {
        rec.pre_inputs.push_back(InputAdd{std::string(model::kLaunchInput), Origin::Fallback});
      }
      last_output = reply->text;
      current = process_sentence(report, std::move(rec), rule_inputs, options);
      continue;
    }
    if (!driver.has_budget()) break;

    std::vector<InputAdd> pre;
    std::string input;
    if (kind == BaselineKind::Chatbot) {
      std::string said;
      try {
        said = gateway->complete(*chat, {llm::ChatMessage{llm::Role::User, last_output}},
                                 llm::ChatContext{last_output});
        ++report.stats.chat_calls;
      } catch (const ContextOverflow&) {
        chat->restart_window();
      } catch (const BackendUnavailable&) {
      }
      input = std::string(text::trim(said));
      if (input.empty()) input = "help";
      if (m.add_input(current, input, Origin::Gateway)) pre.push_back(InputAdd{input, Origin::Gateway});
    } else {
      ensure_inputs(m, current, pre);
      const auto sigma = m.sigma(current);
      input = kind == BaselineKind::Random ? sigma[rng.below(sigma.size())].phrase : weighted_pick(sigma);
    }

    auto reply = driver.send(input);
    if (!reply) break;
    RoundRecord rec = start_record(driver.round(), current, input, *reply);
    rec.pre_inputs = std::move(pre);
    last_output = reply->text;
    current = process_sentence(report, std::move(rec), rule_inputs, options);
  }
  driver.finish();
  return report;
}

model::BehaviorModel replay(const std::vector<RoundRecord>& transcript) {
  model::BehaviorModel m;
  for (const auto& rec : transcript) {
    for (const auto& a : rec.pre_inputs) m.add_input(rec.state_before, a.phrase, a.origin);
    const std::string key = output_key(rec.raw_output);
    const StateId to = extract::apply_decision(m, rec.decision, key);
    if (to != rec.resolved) {
      throw ParseError("round " + std::to_string(rec.round) + " resolves to state " + std::to_string(to.value) +
                       ", transcript says " + std::to_string(rec.resolved.value));
    }
    if (rec.marked_confusion) m.mark_confusion(to);
    if (rec.marked_final) m.mark_final(to);
    m.record_interaction(rec.state_before, rec.input, key, to);
    for (const auto& a : rec.inputs_added) m.add_input(to, a.phrase, a.origin);
    if (rec.validity) m.set_validity(rec.state_before, rec.input, *rec.validity);
    for (const auto& a : rec.feedback_inputs) m.add_input(to, a.phrase, a.origin);
  }
  return m;
}

std::set<std::string> canonicalize(const std::vector<SentenceState>& sentences, llm::Gateway& gateway,
                                   const RunOptions& options) {
  Canonicalizer c(gateway, options);
  for (const auto& s : sentences) c.add(s.text, s.inputs);
  std::set<std::string> out;
  for (const auto& s : c.model().states()) {
    if (s.id != c.model().initial()) out.insert(s.label);
  }
  return out;
}

std::set<std::string> canonicalize(const std::vector<std::string>& sentences, llm::Gateway& gateway,
                                   const RunOptions& options) {
  std::vector<SentenceState> with_inputs;
  for (const auto& s : sentences) with_inputs.push_back(SentenceState{s, inputs::rule_based_inputs(s, options.parser)});
  return canonicalize(with_inputs, gateway, options);
}

std::vector<SentenceState> discovered_sentences(const TestReport& report) {
  std::vector<SentenceState> out;
  for (const auto& s : report.model.states()) {
    if (s.id == report.model.initial()) continue;
    out.push_back(SentenceState{s.label, extract::sigma_phrases(report.model, s.id)});
  }
  return out;
}

std::vector<CoveragePoint> coverage_timeline(const TestReport& report, const model::BehaviorModel& truth) {
  std::set<StateId> covered{truth.initial()};
  std::vector<CoveragePoint> out;
  const int total = static_cast<int>(truth.size());
  for (const auto& rec : report.transcript) {
    if (auto s = truth.find_state(rec.raw_output)) covered.insert(*s);
    out.push_back(CoveragePoint{rec.round, static_cast<int>(covered.size()), total});
  }
  return out;
}

std::vector<std::vector<CoveragePoint>> coverage_union(const std::vector<const TestReport*>& reports,
                                                       llm::Gateway& gateway, const RunOptions& options) {
  Canonicalizer c(gateway, options);
  for (const TestReport* r : reports) {
    for (const auto& rec : r->transcript) {
      if (text::trim(rec.raw_output).empty()) continue;
      c.add(rec.raw_output, rec.ended ? std::vector<std::string>{} : extract::sigma_phrases(r->model, rec.resolved));
    }
  }
  std::vector<std::vector<CoveragePoint>> out;
  const int total = static_cast<int>(c.model().size());
  for (const TestReport* r : reports) {
    std::set<StateId> covered{c.model().initial()};
    std::vector<CoveragePoint> timeline;
    for (const auto& rec : r->transcript) {
      if (auto s = c.model().find_state(rec.raw_output)) covered.insert(*s);
      timeline.push_back(CoveragePoint{rec.round, static_cast<int>(covered.size()), total});
    }
    out.push_back(std::move(timeline));
  }
  return out;
}

double rate_at(const std::vector<CoveragePoint>& timeline, int round) {
  double rate = 0.0;
  for (const auto& p : timeline) {
    if (p.round > round) break;
    rate = p.rate();
  }
  return rate;
}

std::string compare_csv(const std::vector<std::string>& modes,
                        const std::vector<std::vector<std::vector<CoveragePoint>>>& timelines, int rounds) {
  std::string out = "round";
  for (const auto& mode : modes) out += "," + mode;
  out += "\n";
  char buf[32];
  for (int r = 1; r <= rounds; ++r) {
    out += std::to_string(r);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      double sum = 0.0;
      for (const auto& t : timelines[i]) sum += rate_at(t, r);
      const double mean = timelines[i].empty() ? 0.0 : sum / static_cast<double>(timelines[i].size());
      std::snprintf(buf, sizeof buf, ",%.4f", mean);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string report_to_json(const TestReport& report) {
  json j;
  j["tester"] = report.tester;
  j["seed"] = report.seed;
  j["stop_reason"] = report.stop_reason;

  json transcript = json::array();
  for (const auto& rec : report.transcript) {
    json r;
    r["round"] = rec.round;
    r["state_before"] = rec.state_before.value;
    r["input"] = rec.input;
    r["raw_output"] = rec.raw_output;
    r["ended"] = rec.ended;
    r["timed_out"] = rec.timed_out;
    r["pre_inputs"] = adds_to_json(rec.pre_inputs);
    if (rec.decision.kind == extract::StateDecision::Kind::MergedInto) {
      r["decision"] = {{"kind", "merged_into"}, {"state", rec.decision.target.value}};
    } else {
      r["decision"] = {{"kind", "new_state"}, {"label", rec.decision.label}};
    }
    r["source"] = to_string(rec.source);
    r["resolved"] = rec.resolved.value;
    r["marked_final"] = rec.marked_final;
    r["marked_confusion"] = rec.marked_confusion;
    r["inputs_added"] = adds_to_json(rec.inputs_added);
    r["validity"] = rec.validity ? json(model::to_string(*rec.validity)) : json(nullptr);
    r["feedback_inputs"] = adds_to_json(rec.feedback_inputs);
    r["checker_verdicts"] = rec.checker_verdicts;
    if (rec.thought_trace) {
      const auto& t = *rec.thought_trace;
      r["thought_trace"] = {{"step1", t.step1}, {"step2", t.step2}, {"step3", t.step3}, {"chosen", t.chosen}};
    } else {
      r["thought_trace"] = nullptr;
    }
    transcript.push_back(std::move(r));
  }
  j["transcript"] = std::move(transcript);
  j["model"] = json::parse(report.model.to_json());

  json eval = json::array();
  for (const auto& e : report.eval) {
    eval.push_back({{"round", e.round}, {"truth_state", e.truth_state}, {"was_fallback", e.was_fallback}});
  }
  j["eval"] = std::move(eval);

  json coverage = json::array();
  for (const auto& p : report.coverage) coverage.push_back({{"round", p.round}, {"covered", p.covered}, {"total", p.total}});
  j["coverage"] = std::move(coverage);

  const Stats& s = report.stats;
  j["stats"] = {{"extraction", phase_to_json(s.extraction)},
                {"generation", phase_to_json(s.generation)},
                {"exploration", phase_to_json(s.exploration)},
                {"chat_calls", s.chat_calls},
                {"exact_matches", s.exact_matches},
                {"relaunches", s.relaunches},
                {"timeouts", s.timeouts},
                {"llm_calls", s.llm_calls()},
                {"fallbacks", s.fallbacks()}};
  return j.dump(2) + "\n";
}

TestReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    TestReport report;
    report.tester = j.at("tester").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.stop_reason = j.at("stop_reason").get<std::string>();
    for (const auto& r : j.at("transcript")) {
      RoundRecord rec;
      rec.round = r.at("round").get<int>();
      rec.state_before = StateId{r.at("state_before").get<std::uint32_t>()};
      rec.input = r.at("input").get<std::string>();
      rec.raw_output = r.at("raw_output").get<std::string>();
      rec.ended = r.at("ended").get<bool>();
      rec.timed_out = r.at("timed_out").get<bool>();
      rec.pre_inputs = adds_from_json(r.at("pre_inputs"));
      const json& d = r.at("decision");
      if (d.at("kind") == "merged_into") {
        rec.decision = extract::StateDecision::merged_into(StateId{d.at("state").get<std::uint32_t>()});
      } else if (d.at("kind") == "new_state") {
        rec.decision = extract::StateDecision::new_state(d.at("label").get<std::string>());
      } else {
        throw ParseError("unknown decision kind");
      }
      rec.source = parse_source(r.at("source").get<std::string>());
      rec.resolved = StateId{r.at("resolved").get<std::uint32_t>()};
      rec.marked_final = r.at("marked_final").get<bool>();
      rec.marked_confusion = r.at("marked_confusion").get<bool>();
      rec.inputs_added = adds_from_json(r.at("inputs_added"));
      if (!r.at("validity").is_null()) rec.validity = model::parse_validity(r.at("validity").get<std::string>());
      rec.feedback_inputs = adds_from_json(r.at("feedback_inputs"));
      rec.checker_verdicts = r.at("checker_verdicts").get<std::vector<std::string>>();
      if (!r.at("thought_trace").is_null()) {
        const json& t = r.at("thought_trace");
        rec.thought_trace = explore::ThoughtTrace{t.at("step1").get<std::string>(), t.at("step2").get<std::string>(),
                                                  t.at("step3").get<std::string>(), t.at("chosen").get<std::string>()};
      }
      report.transcript.push_back(std::move(rec));
    }
    report.model = model::BehaviorModel::from_json(j.at("model").dump());
    for (const auto& e : j.at("eval")) {
      report.eval.push_back(EvalRecord{e.at("round").get<int>(), e.at("truth_state").get<std::string>(),
                                       e.at("was_fallback").get<bool>()});
    }
    for (const auto& p : j.at("coverage")) {
      report.coverage.push_back(CoveragePoint{p.at("round").get<int>(), p.at("covered").get<int>(), p.at("total").get<int>()});
    }
    const json& s = j.at("stats");
    report.stats.extraction = phase_from_json(s.at("extraction"));
    report.stats.generation = phase_from_json(s.at("generation"));
    report.stats.exploration = phase_from_json(s.at("exploration"));
    report.stats.chat_calls = s.at("chat_calls").get<int>();
    report.stats.exact_matches = s.at("exact_matches").get<int>();
    report.stats.relaunches = s.at("relaunches").get<int>();
    report.stats.timeouts = s.at("timeouts").get<int>();
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace vui::runner
