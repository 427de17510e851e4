#include "vui/exploration.hpp"

#include <array>

#include "vui/error.hpp"
#include "vui/llm.hpp"
#include "vui/text.hpp"

namespace vui::explore {

namespace {

llm::ChatMessage user(std::string text) { return llm::ChatMessage{llm::Role::User, std::move(text)}; }

const model::InputEventRecord* find(std::span<const model::InputEventRecord> sigma, std::string_view phrase) {
  const std::string key = text::normalize(phrase);
  for (const auto& r : sigma) {
    if (text::normalize(r.phrase) == key) return &r;
  }
  return nullptr;
}

std::size_t find_ci(const std::string& haystack_lower, std::string_view needle, std::size_t from = 0) {
  return haystack_lower.find(needle, from);
}

}  // namespace

ThoughtTrace parse_thought(std::string_view reply) {
  ThoughtTrace t;
  const std::string lower = text::to_lower(reply);
  const std::size_t out_pos = lower.rfind("output:");
  const std::size_t body_end = out_pos == std::string::npos ? lower.size() : out_pos;

  const std::array<std::string_view, 3> markers = {"step1:", "step2:", "step3:"};
  std::array<std::size_t, 3> at{};
  for (std::size_t i = 0; i < markers.size(); ++i) at[i] = find_ci(lower, markers[i]);
  std::array<std::string*, 3> dest = {&t.step1, &t.step2, &t.step3};
  for (std::size_t i = 0; i < markers.size(); ++i) {
    if (at[i] == std::string::npos || at[i] >= body_end) continue;
    std::size_t end = body_end;
    for (std::size_t j = 0; j < markers.size(); ++j) {
      if (at[j] != std::string::npos && at[j] > at[i] && at[j] < end) end = at[j];
    }
    const std::size_t begin = at[i] + markers[i].size();
    *dest[i] = std::string(text::trim(reply.substr(begin, end - begin)));
  }
  if (out_pos != std::string::npos) t.chosen = llm::parse_output_line(reply);
  return t;
}

std::string to_string(const SelectVerdict& v) {
  switch (v.kind) {
    case SelectVerdict::Kind::Accept: return "accept";
    case SelectVerdict::Kind::NoInputError: return "no_input_error";
    case SelectVerdict::Kind::BetterInputSuggestion: return "better_input_suggestion(" + v.better + ")";
  }
  return "accept";
}

SelectVerdict better_input_checker(std::string_view chosen, std::span<const model::InputEventRecord> sigma) {
  const auto* pick = find(sigma, chosen);
  if (!pick) return {SelectVerdict::Kind::NoInputError, {}};
  const model::InputEventRecord* best = nullptr;
  for (const auto& r : sigma) {
    if (&r == pick || r.validity == model::Validity::Invalid) continue;
    const bool better = pick->validity == model::Validity::Invalid || r.invocation_count < pick->invocation_count;
    if (better && (!best || r.invocation_count < best->invocation_count)) best = &r;
  }
  if (best) return {SelectVerdict::Kind::BetterInputSuggestion, best->phrase};
  return {};
}

SelectVerdict better_input_checker(std::string_view chosen, model::StateId state, const model::BehaviorModel& m) {
  const auto sigma = m.sigma(state);
  return better_input_checker(chosen, sigma);
}

std::string fallback_select(std::span<const model::InputEventRecord> sigma) {
  if (sigma.empty()) throw InvalidArgument("no input events to choose from");
  const model::InputEventRecord* best = nullptr;
  const model::InputEventRecord* best_invalid = nullptr;
  for (const auto& r : sigma) {
    auto& slot = r.validity == model::Validity::Invalid ? best_invalid : best;
    if (!slot || r.invocation_count < slot->invocation_count) slot = &r;
  }
  return (best ? best : best_invalid)->phrase;
}

SelectionResult select_input(model::StateId state, const model::BehaviorModel& model, llm::Gateway& gateway,
                             llm::Session& session) {
  using llm::FeedbackLabel;
  using llm::Phase;
  using llm::PromptKind;

  const auto sigma = model.sigma(state);
  if (sigma.empty()) throw InvalidArgument("state #" + std::to_string(state.value) + " has no input events");

  SelectionResult result;
  const auto& templates = gateway.templates();
  const int cap = gateway.config().max_feedback_rounds;
  const llm::RequestContext context = llm::ExplorationContext{&model, state};

  std::vector<llm::DeltaLine> delta_lines;
  for (const auto& t : model.delta_from(state)) {
    delta_lines.push_back({model.state(t.from).label, t.input, model.state(t.to).label});
  }
  std::vector<llm::SigmaLine> sigma_lines;
  llm::PhraseList phrases;
  for (const auto& r : sigma) {
    sigma_lines.push_back({r.phrase, r.invocation_count, r.validity});
    phrases.push_back(r.phrase);
  }
  llm::Slots slots{{"state", model.state(state).label},
                   {"delta", delta_lines},
                   {"sigma", sigma_lines},
                   {"inputs", phrases},
                   {"few_shots", templates.few_shots(Phase::Exploration)}};
  auto prompt = [&](PromptKind kind) { return user(llm::render(templates.prompt(Phase::Exploration, kind), slots)); };

  bool long_prompt = !session.long_prompt_used();
  std::vector<llm::ChatMessage> delta{prompt(long_prompt ? PromptKind::Long : PromptKind::Short)};
  bool restarted = false;

  while (true) {
    std::string reply;
    try {
      reply = gateway.complete(session, delta, context);
    } catch (const ContextOverflow&) {
      if (restarted) break;
      restarted = true;
      session.restart_window();
      session.mark_long_prompt_used();
      long_prompt = false;
      delta = {prompt(PromptKind::Short)};
      continue;
    } catch (const BackendUnavailable&) {
      break;
    }
    ++result.llm_calls;
    if (long_prompt) session.mark_long_prompt_used();
    long_prompt = false;

    ThoughtTrace trace = parse_thought(reply);
    const SelectVerdict verdict = better_input_checker(trace.chosen, sigma);
    result.verdicts.push_back(verdict);
    if (verdict.kind == SelectVerdict::Kind::Accept) {
      result.phrase = find(sigma, trace.chosen)->phrase;
      result.trace = std::move(trace);
      return result;
    }
    slots["bad_input"] = trace.chosen;
    result.rejected.push_back(std::move(trace));
    if (result.feedback_rounds >= cap) break;
    ++result.feedback_rounds;
    if (verdict.kind == SelectVerdict::Kind::NoInputError) {
      delta = {user(llm::render(templates.feedback(FeedbackLabel::NoInputError), slots))};
    } else {
      slots["better_input"] = verdict.better;
      delta = {user(llm::render(templates.feedback(FeedbackLabel::BetterInputSuggestion), slots))};
    }
  }

  result.used_fallback = true;
  result.phrase = fallback_select(sigma);
  return result;
}

}  // namespace vui::explore
