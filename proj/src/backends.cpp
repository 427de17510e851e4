#include <algorithm>
#include <cctype>

#include "vui/error.hpp"
#include "vui/exploration.hpp"
#include "vui/extraction.hpp"
#include "vui/input_generation.hpp"
#include "vui/llm.hpp"
#include "vui/text.hpp"

namespace vui::llm {

namespace {

constexpr double kSameInputs = 0.5;

// The state a perfect extractor would answer with, or nullopt for a new one.
std::optional<model::StateId> correct_state(const ExtractionContext& ctx, const TruthOracle* truth) {
  const auto& m = *ctx.model;
  if (auto known = m.find_state(ctx.raw_output)) return known;
  if (truth) {
    const auto want = truth->truth_of(ctx.raw_output);
    if (!want) return std::nullopt;
    for (const auto& s : m.states()) {
      if (s.id == m.initial()) continue;
      for (const auto& v : s.variants) {
        if (truth->truth_of(v) == want) return s.id;
      }
    }
    return std::nullopt;
  }
  // Without ground truth, outputs offering exactly the same replies are
  // taken to be the same functionality.
  if (ctx.candidate_inputs.empty()) return std::nullopt;
  for (const auto& s : m.states()) {
    if (s.id == m.initial()) continue;
    if (extract::input_similarity(extract::sigma_phrases(m, s.id), ctx.candidate_inputs) == 1.0) return s.id;
  }
  return std::nullopt;
}

// Whole-word mention of the phrase in the app output.
bool mentioned_in(std::string_view phrase, std::string_view output) {
  auto words = [](std::string_view t) {
    std::string out = " ";
    for (char c : text::normalize(t)) out += std::isalnum(static_cast<unsigned char>(c)) || c == '\'' ? c : ' ';
    return out + " ";
  };
  std::string p = words(phrase);
  std::string o = words(output);
  auto squeeze = [](std::string& t) {
    t.erase(std::unique(t.begin(), t.end(), [](char a, char b) { return a == ' ' && b == ' '; }), t.end());
  };
  squeeze(p);
  squeeze(o);
  return p.size() > 2 && o.find(p) != std::string::npos;
}

// Never-invoked inputs the app itself offered come first; otherwise the
// least-invoked usable input.
std::string context_choice(const model::BehaviorModel& m, model::StateId state) {
  const auto sigma = m.sigma(state);
  const std::string& label = m.state(state).label;
  for (const auto& r : sigma) {
    if (r.invocation_count == 0 && mentioned_in(r.phrase, label)) return r.phrase;
  }
  return explore::fallback_select(sigma);
}

std::string exploration_reply(const model::BehaviorModel& m, model::StateId state, std::string_view choice) {
  std::vector<std::string> invalid;
  std::vector<std::string> fresh;
  for (const auto& r : m.sigma(state)) {
    if (r.validity == model::Validity::Invalid) invalid.push_back(r.phrase);
    if (r.invocation_count == 0) fresh.push_back(r.phrase);
  }
  std::string out = "Thought: step1: ";
  out += invalid.empty() ? "nothing to drop." : "drop " + text::join(invalid, ", ") + ".";
  out += " step2: ";
  if (fresh.empty()) {
    out += "every input was sent before.";
  } else {
    const std::string& label = m.state(state).label;
    const auto related =
        std::find_if(fresh.begin(), fresh.end(), [&](const std::string& p) { return mentioned_in(p, label); });
    out += (related == fresh.end() ? fresh.front() : *related) + " was never sent.";
  }
  out += " step3: choose " + std::string(choice) + ".\nOutput: " + std::string(choice);
  return out;
}

std::string chat_reply(const ChatContext& ctx, Rng& rng) {
  const auto options = inputs::rule_based_inputs(ctx.app_output);
  const std::string pick = options[rng.below(options.size())];
  if (rng.chance(0.5)) return "I think I would like " + pick + ", please.";
  return pick;
}

std::optional<std::string> suboptimal_choice(const model::BehaviorModel& m, model::StateId state) {
  const auto sigma = m.sigma(state);
  for (const auto& r : sigma) {
    if (explore::better_input_checker(r.phrase, sigma).kind == explore::SelectVerdict::Kind::BetterInputSuggestion) {
      return r.phrase;
    }
  }
  return std::nullopt;
}

std::optional<model::StateId> wrong_merge_target(const ExtractionContext& ctx) {
  const auto& m = *ctx.model;
  std::optional<model::StateId> fallback;
  for (const auto& s : m.states()) {
    if (extract::input_similarity(extract::sigma_phrases(m, s.id), ctx.candidate_inputs) >= kSameInputs) continue;
    if (s.id != m.initial()) return s.id;
    fallback = s.id;
  }
  return fallback;
}

bool echo_triggers_merge_hint(const ExtractionContext& ctx, const TruthOracle* truth) {
  const auto& m = *ctx.model;
  if (!correct_state(ctx, truth) || m.find_state(ctx.raw_output) || !ctx.prev_state) return false;
  const std::string key = text::normalize(ctx.prev_input);
  for (const auto& t : m.delta_from(*ctx.prev_state)) {
    if (text::normalize(t.input) == key) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(Fault f) {
  switch (f) {
    case Fault::OutOfSetState: return "out_of_set_state";
    case Fault::WrongMerge: return "wrong_merge";
    case Fault::RawEchoWhenMerge: return "raw_echo_when_merge";
    case Fault::EmptyInputs: return "empty_inputs";
    case Fault::OverlongInputs: return "overlong_inputs";
    case Fault::OutOfSetSelection: return "out_of_set_selection";
    case Fault::SuboptimalSelection: return "suboptimal_selection";
  }
  return "";
}

std::string perfect_reply(const Request& request, const TruthOracle* truth) {
  struct Visitor {
    const TruthOracle* truth;
    Rng& rng;
    std::string operator()(const ExtractionContext& ctx) const {
      if (auto s = correct_state(ctx, truth)) return "Output: " + ctx.model->state(*s).label;
      return "Output: " + std::string(text::trim(ctx.raw_output));
    }
    std::string operator()(const GenerationContext& ctx) const {
      return "Output: " + text::format_list(inputs::rule_based_inputs(ctx.raw_output));
    }
    std::string operator()(const ExplorationContext& ctx) const {
      return exploration_reply(*ctx.model, ctx.state, context_choice(*ctx.model, ctx.state));
    }
    std::string operator()(const ChatContext& ctx) const { return chat_reply(ctx, rng); }
  };
  return std::visit(Visitor{truth, request.rng}, request.context);
}

std::vector<Fault> applicable_faults(const Request& request, const TruthOracle* truth) {
  std::vector<Fault> out;
  if (const auto* ctx = std::get_if<ExtractionContext>(&request.context)) {
    out.push_back(Fault::OutOfSetState);
    if (wrong_merge_target(*ctx)) out.push_back(Fault::WrongMerge);
    if (echo_triggers_merge_hint(*ctx, truth)) out.push_back(Fault::RawEchoWhenMerge);
  } else if (std::holds_alternative<GenerationContext>(request.context)) {
    out.push_back(Fault::EmptyInputs);
    out.push_back(Fault::OverlongInputs);
  } else if (const auto* ctx = std::get_if<ExplorationContext>(&request.context)) {
    out.push_back(Fault::OutOfSetSelection);
    if (suboptimal_choice(*ctx->model, ctx->state)) out.push_back(Fault::SuboptimalSelection);
  }
  return out;
}

std::string faulty_reply(const Request& request, Fault fault, const TruthOracle* truth) {
  switch (fault) {
    case Fault::OutOfSetState: {
      const auto& ctx = std::get<ExtractionContext>(request.context);
      std::string label = "A state about something else";
      while (ctx.model->find_state(label) || text::normalize(label) == text::normalize(ctx.raw_output)) label += "!";
      return "Output: " + label;
    }
    case Fault::WrongMerge: {
      const auto& ctx = std::get<ExtractionContext>(request.context);
      return "Output: " + ctx.model->state(*wrong_merge_target(ctx)).label;
    }
    case Fault::RawEchoWhenMerge: {
      const auto& ctx = std::get<ExtractionContext>(request.context);
      return "Output: " + std::string(text::trim(ctx.raw_output));
    }
    case Fault::EmptyInputs: return "Output: []";
    case Fault::OverlongInputs:
      return R"(Output: ["i would really like to hear a lot more about that", "could you please repeat all of the options again"])";
    case Fault::OutOfSetSelection: {
      const auto& ctx = std::get<ExplorationContext>(request.context);
      std::string phrase = "tell me a joke";
      while (ctx.model->find_input(ctx.state, phrase)) phrase += " please";
      return exploration_reply(*ctx.model, ctx.state, phrase);
    }
    case Fault::SuboptimalSelection: {
      const auto& ctx = std::get<ExplorationContext>(request.context);
      return exploration_reply(*ctx.model, ctx.state, *suboptimal_choice(*ctx.model, ctx.state));
    }
  }
  return perfect_reply(request, truth);
}

std::string PerfectBackend::reply(const Request& request) { return perfect_reply(request, truth_.get()); }

NoisyBackend::NoisyBackend(double error_rate, std::shared_ptr<const TruthOracle> truth)
    : error_rate_(error_rate), truth_(std::move(truth)) {
  if (error_rate < 0.0 || error_rate > 1.0) throw InvalidArgument("error_rate must be within [0, 1]");
}

std::string NoisyBackend::reply(const Request& request) {
  if (!request.rng.chance(error_rate_)) return perfect_reply(request, truth_.get());
  const auto faults = applicable_faults(request, truth_.get());
  if (faults.empty()) return perfect_reply(request, truth_.get());
  return faulty_reply(request, faults[request.rng.below(faults.size())], truth_.get());
}

std::shared_ptr<Backend> make_backend(const GatewayConfig& config, std::shared_ptr<const TruthOracle> truth) {
  config.validate();
  switch (config.backend) {
    case BackendKind::Perfect: return std::make_shared<PerfectBackend>(std::move(truth));
    case BackendKind::Noisy: return std::make_shared<NoisyBackend>(config.error_rate, std::move(truth));
    case BackendKind::Remote: return std::make_shared<RemoteBackend>(config);
  }
  throw InvalidArgument("unknown backend");
}

}  // namespace vui::llm
