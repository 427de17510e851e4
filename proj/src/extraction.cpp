#include "vui/extraction.hpp"

#include <algorithm>
#include <set>

#include "vui/error.hpp"
#include "vui/llm.hpp"
#include "vui/text.hpp"

namespace vui::extract {

namespace {

llm::ChatMessage user(std::string text) { return llm::ChatMessage{llm::Role::User, std::move(text)}; }

constexpr int kOverflowRetries = 3;

}  // namespace

std::string to_string(const FilterVerdict& v) {
  switch (v.kind) {
    case FilterVerdict::Kind::Accept: return "accept";
    case FilterVerdict::Kind::NoStateError: return "no_state_error";
    case FilterVerdict::Kind::NotMergeSuggestion:
      return "not_merge_suggestion(#" + std::to_string(v.state ? v.state->value : 0) + ")";
    case FilterVerdict::Kind::ShouldMergeSuggestion:
      return "should_merge_suggestion(#" + std::to_string(v.state ? v.state->value : 0) + ")";
  }
  return "accept";
}

double input_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa;
  std::set<std::string> sb;
  for (const auto& x : a) sa.insert(text::normalize(x));
  for (const auto& x : b) sb.insert(text::normalize(x));
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& x : sa) common += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::vector<std::string> sigma_phrases(const model::BehaviorModel& m, model::StateId s) {
  std::vector<std::string> out;
  for (const auto& rec : m.sigma(s)) out.push_back(rec.phrase);
  return out;
}

FilterVerdict state_filter(std::string_view candidate, std::string_view raw_output,
                           const model::BehaviorModel& model, std::optional<model::StateId> prev_state,
                           std::string_view prev_input, const std::vector<std::string>& candidate_inputs,
                           const FilterOptions& options) {
  using Kind = FilterVerdict::Kind;
  const auto existing = model.find_state(candidate);
  const bool is_raw = !text::trim(candidate).empty() && text::normalize(candidate) == text::normalize(raw_output);
  if (!existing && !is_raw) return {Kind::NoStateError, std::nullopt};
  if (existing) {
    if (input_similarity(sigma_phrases(model, *existing), candidate_inputs) < options.same_inputs_threshold) {
      return {Kind::NotMergeSuggestion, existing};
    }
    return {Kind::Accept, existing};
  }
  if (prev_state && model.contains(*prev_state)) {
    const std::string key = text::normalize(prev_input);
    for (const auto& t : model.delta_from(*prev_state)) {
      if (text::normalize(t.input) == key) return {Kind::ShouldMergeSuggestion, t.to};
    }
  }
  return {Kind::Accept, std::nullopt};
}

ExtractionResult extract_state(const ExtractionRequest& request, const model::BehaviorModel& model,
                               llm::Gateway& gateway, llm::Session& session, const FilterOptions& options) {
  using llm::FeedbackLabel;
  using llm::Phase;
  using llm::PromptKind;
  using Kind = FilterVerdict::Kind;

  ExtractionResult result;
  const auto& templates = gateway.templates();
  const int cap = gateway.config().max_feedback_rounds;

  llm::PhraseList labels;
  for (const auto& s : model.states()) labels.push_back(s.label);

  llm::ExtractionContext ctx;
  ctx.raw_output = request.raw_output;
  ctx.candidate_inputs = request.candidate_inputs;
  ctx.model = &model;
  ctx.prev_state = request.prev_state;
  ctx.prev_input = request.prev_input;
  const llm::RequestContext context = ctx;

  llm::Slots slots{{"app_output", request.raw_output},
                   {"state_set", labels},
                   {"few_shots", templates.few_shots(Phase::Extraction)}};
  auto prompt = [&](PromptKind kind) { return user(llm::render(templates.prompt(Phase::Extraction, kind), slots)); };
  auto feedback = [&](FeedbackLabel label) { return user(llm::render(templates.feedback(label), slots)); };

  bool long_prompt = !session.long_prompt_used();
  std::vector<llm::ChatMessage> delta{prompt(long_prompt ? PromptKind::Long : PromptKind::Short)};
  int overflows = 0;

  while (true) {
    std::string reply;
    try {
      reply = gateway.complete(session, delta, context);
    } catch (const ContextOverflow&) {
      if (++overflows > kOverflowRetries) break;
      // Oldest states go first; the most recent ones are the likeliest matches.
      auto& list = std::get<llm::PhraseList>(slots["state_set"]);
      list.erase(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(list.size() / 2));
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

    const std::string candidate = llm::parse_output_line(reply);
    const FilterVerdict verdict = state_filter(candidate, request.raw_output, model, request.prev_state,
                                               request.prev_input, request.candidate_inputs, options);
    result.candidates.push_back(candidate);
    result.verdicts.push_back(verdict);

    if (verdict.kind == Kind::Accept) {
      result.decision = verdict.state ? StateDecision::merged_into(*verdict.state)
                                      : StateDecision::new_state(std::string(text::trim(request.raw_output)));
      return result;
    }
    if (result.feedback_rounds >= cap) break;
    ++result.feedback_rounds;

    switch (verdict.kind) {
      case Kind::NoStateError:
        slots["bad_state"] = candidate;
        delta = {feedback(FeedbackLabel::NoStateError)};
        break;
      case Kind::NotMergeSuggestion:
        slots["bad_state"] = model.state(*verdict.state).label;
        delta = {feedback(FeedbackLabel::NotMergeSuggestion)};
        break;
      case Kind::ShouldMergeSuggestion:
        slots["state"] = model.state(*verdict.state).label;
        delta = {feedback(FeedbackLabel::ShouldMergeSuggestion)};
        break;
      case Kind::Accept: break;
    }
  }

  result.used_fallback = true;
  if (auto known = model.find_state(request.raw_output)) {
    result.decision = StateDecision::merged_into(*known);
    return result;
  }
  if (request.confusion) {
    for (const auto& s : model.states()) {
      if (s.is_confusion &&
          input_similarity(sigma_phrases(model, s.id), request.candidate_inputs) >= options.same_inputs_threshold) {
        result.decision = StateDecision::merged_into(s.id);
        return result;
      }
    }
  }
  result.decision = StateDecision::new_state(std::string(text::trim(request.raw_output)));
  return result;
}

model::StateId apply_decision(model::BehaviorModel& model, const StateDecision& decision,
                              std::string_view raw_output) {
  if (decision.kind == StateDecision::Kind::MergedInto) {
    model.merge_output(raw_output, decision.target);
    return decision.target;
  }
  const model::StateId id = model.ensure_state(decision.label);
  if (!model.find_state(raw_output)) model.merge_output(raw_output, id);
  return id;
}

}  // namespace vui::extract
