#include "vui/input_generation.hpp"

#include "vui/error.hpp"
#include "vui/llm.hpp"

namespace vui::inputs {

namespace {

llm::ChatMessage user(std::string text) { return llm::ChatMessage{llm::Role::User, std::move(text)}; }

}  // namespace

std::string to_string(const InputCheck& c) {
  switch (c.kind) {
    case InputCheck::Kind::Ok: return "ok";
    case InputCheck::Kind::EmptyError: return "empty_error";
    case InputCheck::Kind::InvalidSuggestion: return "invalid_suggestion(" + c.input + ")";
  }
  return "ok";
}

GenerationResult generate_inputs(std::string_view raw_output, llm::Gateway& gateway, llm::Session& session,
                                 const ParserConfig& config, const std::optional<std::string>& invalid_input) {
  using llm::FeedbackLabel;
  using llm::Phase;
  using llm::PromptKind;

  GenerationResult result;
  const auto& templates = gateway.templates();
  const int cap = gateway.config().max_feedback_rounds;
  const llm::RequestContext context = llm::GenerationContext{std::string(raw_output)};

  llm::Slots slots{{"app_output", std::string(raw_output)},
                   {"few_shots", templates.few_shots(Phase::Generation)}};
  if (invalid_input) slots["bad_input"] = *invalid_input;

  auto prompt = [&](PromptKind kind) { return user(llm::render(templates.prompt(Phase::Generation, kind), slots)); };

  std::vector<llm::ChatMessage> delta;
  bool long_prompt = false;
  if (invalid_input && session.long_prompt_used()) {
    delta.push_back(user(llm::render(templates.feedback(FeedbackLabel::InvalidSuggestion), slots)));
  } else {
    long_prompt = !session.long_prompt_used();
    delta.push_back(prompt(long_prompt ? PromptKind::Long : PromptKind::Short));
  }

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
      delta = {prompt(PromptKind::Short)};
      continue;
    } catch (const BackendUnavailable&) {
      break;
    }
    ++result.llm_calls;
    if (long_prompt) session.mark_long_prompt_used();
    long_prompt = false;

    auto items = normalize_inputs(llm::parse_phrase_list(reply), config.max_words);
    if (!items.empty()) {
      result.verdicts.push_back(InputCheck::ok());
      result.inputs = std::move(items);
      result.origin = model::Origin::Gateway;
      return result;
    }
    result.verdicts.push_back(InputCheck::empty_error());
    if (result.feedback_rounds >= cap) break;
    ++result.feedback_rounds;
    delta = {user(llm::render(templates.feedback(FeedbackLabel::EmptyError), slots))};
  }

  result.used_fallback = true;
  result.origin = model::Origin::Fallback;
  result.inputs = rule_based_inputs(raw_output, config);
  return result;
}

void FeedbackQueue::push(model::StateId state, std::string input) { pending_[state].push_back(std::move(input)); }

std::optional<std::string> FeedbackQueue::pop(model::StateId state) {
  auto it = pending_.find(state);
  if (it == pending_.end() || it->second.empty()) return std::nullopt;
  std::string front = std::move(it->second.front());
  it->second.erase(it->second.begin());
  if (it->second.empty()) pending_.erase(it);
  return front;
}

bool FeedbackQueue::has(model::StateId state) const { return pending_.count(state) > 0; }

InputCheck judge_input_outcome(model::StateId state, std::string_view input, model::StateId next_state,
                               std::string_view next_raw_output, const ParserConfig& config) {
  if (next_state == state || is_confusion_response(next_raw_output, config)) {
    return InputCheck::invalid(std::string(input));
  }
  return InputCheck::ok();
}

InputCheck check_input_outcome(model::BehaviorModel& model, model::StateId state, std::string_view input,
                               model::StateId next_state, std::string_view next_raw_output, FeedbackQueue* queue,
                               const ParserConfig& config) {
  const auto verdict = judge_input_outcome(state, input, next_state, next_raw_output, config);
  const auto* rec = model.find_input(state, input);
  if (!rec) throw UnknownInput(std::string(input));
  if (rec->invocation_count > 0) {
    model.set_validity(state, input,
                       verdict.kind == InputCheck::Kind::Ok ? model::Validity::Valid : model::Validity::Invalid);
  }
  if (verdict.kind == InputCheck::Kind::InvalidSuggestion && queue) queue->push(state, rec->phrase);
  return verdict;
}

}  // namespace vui::inputs
