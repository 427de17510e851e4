#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vui/error.hpp"
#include "vui/input_generation.hpp"
#include "vui/llm.hpp"
#include "vui/text.hpp"

namespace vui::llm {

namespace {

constexpr std::array<std::string_view, 10> kPlaceholders = {
    "app_output", "state_set", "inputs",     "state",        "delta",
    "sigma",      "bad_state", "bad_input",  "better_input", "few_shots",
};

constexpr std::array<Phase, 3> kPromptPhases = {Phase::Extraction, Phase::Generation, Phase::Exploration};

constexpr std::array<FeedbackLabel, 7> kFeedbackLabels = {
    FeedbackLabel::NoStateError,  FeedbackLabel::NotMergeSuggestion, FeedbackLabel::ShouldMergeSuggestion,
    FeedbackLabel::EmptyError,    FeedbackLabel::InvalidSuggestion,  FeedbackLabel::NoInputError,
    FeedbackLabel::BetterInputSuggestion,
};

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls fn(name, begin, end) for every {identifier} in body.
template <typename Fn>
void scan_placeholders(std::string_view body, Fn&& fn) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < body.size() && is_ident_char(body[j])) ++j;
    if (j > i + 1 && j < body.size() && body[j] == '}') {
      fn(body.substr(i + 1, j - i - 1), i, j + 1);
      i = j;
    }
  }
}

std::string serialize(const SlotValue& value) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const PhraseList& list) const { return text::format_list(list); }
    std::string operator()(const std::vector<DeltaLine>& lines) const {
      if (lines.empty()) return "(no transitions yet)";
      std::string out;
      for (const auto& l : lines) {
        if (!out.empty()) out += '\n';
        out += "delta(" + l.state + ", " + l.input + ") = " + l.next_state;
      }
      return out;
    }
    std::string operator()(const std::vector<SigmaLine>& lines) const {
      if (lines.empty()) return "(no input events)";
      std::string out;
      for (const auto& l : lines) {
        if (!out.empty()) out += '\n';
        out += l.input + " (invoked " + std::to_string(l.count) + " times, " +
               std::string(model::to_string(l.validity)) + ")";
      }
      return out;
    }
  };
  return std::visit(Visitor{}, value);
}

// ---------------------------------------------------------------------------
// Default texts.

constexpr std::string_view kExtractionLong =
    R"tpl(You maintain the state set of a finite-state behavior model of a voice application. A state stands for one functionality, purpose or context of the application, so application outputs that mean the same thing, even when worded differently, belong to the same state. Given an application output and the current state set, answer with the state from the set that the output belongs to. If no state in the set fits, answer with the output sentence itself to open a new state. Reply with a single line "Output: <state>".

{few_shots}

Input: "{app_output}", {state_set}
Output:)tpl";

constexpr std::string_view kExtractionShort = R"tpl(Input: "{app_output}", {state_set}
Output:)tpl";

constexpr std::string_view kExtractionFewShots =
    R"tpl(Input: "Welcome to Pet Buddy. Do you want to walk or play?", ["<START>"]
Output: Welcome to Pet Buddy. Do you want to walk or play?

Input: "Hi again from Pet Buddy! Would you like to walk or play?", ["<START>", "Welcome to Pet Buddy. Do you want to walk or play?"]
Output: Welcome to Pet Buddy. Do you want to walk or play?

Input: "Your dog loved the walk. Do you want to go home or keep walking?", ["<START>", "Welcome to Pet Buddy. Do you want to walk or play?"]
Output: Your dog loved the walk. Do you want to go home or keep walking?)tpl";

constexpr std::string_view kGenerationLong =
    R"tpl(Voice applications only understand short and simple replies. List every reply a user could give to the application output below, using these rules:
- phrases after "say" or "ask" (instruction question)
- the conjuncts linked by "and", "or" and "," (selection question)
- "yes" and "no" (yes-no question)
- nouns related to <noun> (What <noun> question)
- phrases related to the state (other questions)
Each reply has at most five words. Reply with a single line: Output: ["reply", "reply"]

{few_shots}

Input: "{app_output}"
Output:)tpl";

constexpr std::string_view kGenerationShort = R"tpl(Input: "{app_output}"
Output:)tpl";

constexpr std::string_view kExplorationLong =
    R"tpl(The behavior model of a voice application is a finite-state machine built while talking to it. Every state is one functionality of the application. Lines "delta(state, input) = next_state" are the transitions observed so far from the current state. Lines "input (invoked k times, validity)" are the input events of the current state: valid inputs reached a different state, invalid ones stayed in the same state or confused the application, unknown ones were never sent.

Pick the input event most likely to reach states not seen yet. Work step by step:
step1: drop input events whose transitions lead to a duplicate or a wrong state.
step2: find the never-invoked input event that is most related to the current state.
step3: choose between that input event and the invoked valid ones, preferring the less invoked.
Write "Thought: step1: ... step2: ... step3: ..." and end with a single line "Output: <input>".

{few_shots}

Input: "{state}"
{delta}
{sigma}
Thought:)tpl";

constexpr std::string_view kExplorationShort = R"tpl(Input: "{state}"
{delta}
{sigma}
Thought:)tpl";

constexpr std::string_view kExplorationFewShots =
    R"tpl(Input: "Welcome to Pet Buddy. Do you want to walk or play?"
delta(Welcome to Pet Buddy. Do you want to walk or play?, walk) = Your dog loved the walk. Do you want to go home or keep walking?
yes (invoked 1 times, invalid)
no (invoked 0 times, unknown)
walk (invoked 1 times, valid)
play (invoked 0 times, unknown)
Thought: step1: yes stayed in the same state, drop it. step2: play was never sent and fits a pet game. step3: play is unexplored and related, choose play.
Output: play

Input: "You can ask for Service Times, or say Goodbye."
(no transitions yet)
service times (invoked 0 times, unknown)
goodbye (invoked 0 times, unknown)
Thought: step1: nothing to drop. step2: service times opens a new topic while goodbye ends the session. step3: choose service times.
Output: service times)tpl";

constexpr std::string_view kNoStateError =
    "The {bad_state} is not in the state set {state_set}. Find a semantically similar state from the "
    "state set {state_set} for the sentence {app_output}.";
constexpr std::string_view kNotMergeSuggestion =
    "The {app_output} and {bad_state} are not semantically similar because they have different input events.";
constexpr std::string_view kShouldMergeSuggestion = "The {app_output} and {state} are semantically similar.";
constexpr std::string_view kEmptyError =
    "The output should be a non-empty python list of the possible non-empty responses to the sentence "
    "{app_output}.";
constexpr std::string_view kInvalidSuggestion =
    R"tpl({bad_input} is not a valid response for the sentence {app_output}. The output should be a python list of phrases after "say" or "ask", the conjunctions linked by "and", "or" and ",", "yes" and "no", nouns related to the asked noun, or phrases related to the state.)tpl";
constexpr std::string_view kNoInputError =
    "{bad_input} is not in the given input event set {inputs}. Please choose another input event from the "
    "input event set {inputs}.";
constexpr std::string_view kBetterInputSuggestion =
    "Choosing the input {better_input} might be better than the input {bad_input}. Please choose another "
    "input event from the input event set {inputs}.";

// Sentences whose rule-based answers form the generation few-shots: one per
// question type, including the three mixed patterns.
constexpr std::array<std::string_view, 8> kGenerationShotSentences = {
    "Would you like to hear today's forecast?",
    "Cats, dogs, or birds?",
    "Say \"next\" to hear another fact.",
    "What is your favorite color?",
    "You can ask for Service Times, or say Goodbye.",
    "What would you like, coffee or tea?",
    "Do you want to walk or play?",
    "Here is your daily horoscope.",
};

std::string generation_few_shots() {
  std::string out;
  for (auto sentence : kGenerationShotSentences) {
    if (!out.empty()) out += "\n\n";
    out += "Input: \"" + std::string(sentence) + "\"\nOutput: " +
           text::format_list(inputs::rule_based_inputs(sentence));
  }
  return out;
}

std::string file_stem(Phase p) { return std::string(to_string(p)); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw TemplateError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  // Editors add a trailing newline; templates never end with one.
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Extraction: return "extraction";
    case Phase::Generation: return "generation";
    case Phase::Exploration: return "exploration";
    case Phase::Chat: return "chat";
  }
  return "chat";
}

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::Long: return "long";
    case PromptKind::Short: return "short";
    case PromptKind::Feedback: return "feedback";
  }
  return "short";
}

std::string_view to_string(FeedbackLabel l) {
  switch (l) {
    case FeedbackLabel::NoStateError: return "no_state_error";
    case FeedbackLabel::NotMergeSuggestion: return "not_merge_suggestion";
    case FeedbackLabel::ShouldMergeSuggestion: return "should_merge_suggestion";
    case FeedbackLabel::EmptyError: return "empty_error";
    case FeedbackLabel::InvalidSuggestion: return "invalid_suggestion";
    case FeedbackLabel::NoInputError: return "no_input_error";
    case FeedbackLabel::BetterInputSuggestion: return "better_input_suggestion";
  }
  return "";
}

Phase phase_of(FeedbackLabel l) {
  switch (l) {
    case FeedbackLabel::NoStateError:
    case FeedbackLabel::NotMergeSuggestion:
    case FeedbackLabel::ShouldMergeSuggestion: return Phase::Extraction;
    case FeedbackLabel::EmptyError:
    case FeedbackLabel::InvalidSuggestion: return Phase::Generation;
    case FeedbackLabel::NoInputError:
    case FeedbackLabel::BetterInputSuggestion: return Phase::Exploration;
  }
  return Phase::Chat;
}

std::span<const std::string_view> placeholder_names() { return kPlaceholders; }

PromptTemplate::PromptTemplate(Phase phase, PromptKind kind, std::string body, std::optional<FeedbackLabel> label)
    : phase_(phase), kind_(kind), label_(label), body_(std::move(body)) {
  scan_placeholders(body_, [&](std::string_view name, std::size_t, std::size_t) {
    if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) == kPlaceholders.end()) {
      throw TemplateError("unknown placeholder {" + std::string(name) + "} in " +
                          std::string(to_string(phase)) + "." + std::string(to_string(kind)) + " template");
    }
    if (std::find(placeholders_.begin(), placeholders_.end(), name) == placeholders_.end()) {
      placeholders_.emplace_back(name);
    }
  });
  if (kind == PromptKind::Long &&
      std::find(placeholders_.begin(), placeholders_.end(), "few_shots") == placeholders_.end()) {
    throw TemplateError("long template for " + std::string(to_string(phase)) + " lacks {few_shots}");
  }
  if (kind == PromptKind::Feedback && !label) throw TemplateError("feedback template needs a label");
}

std::string render(const PromptTemplate& tmpl, const Slots& slots) {
  for (const auto& name : tmpl.placeholders()) {
    if (slots.find(name) == slots.end()) throw MissingSlot(name);
  }
  std::string out;
  std::size_t last = 0;
  const std::string& body = tmpl.body();
  scan_placeholders(body, [&](std::string_view name, std::size_t begin, std::size_t end) {
    out.append(body, last, begin - last);
    out += serialize(slots.find(name)->second);
    last = end;
  });
  out.append(body, last, std::string::npos);
  return out;
}

TemplateSet TemplateSet::defaults() {
  TemplateSet set;
  auto add = [&](Phase p, PromptKind k, std::string_view body) {
    set.prompts_.insert_or_assign(std::pair{p, k}, PromptTemplate(p, k, std::string(body)));
  };
  add(Phase::Extraction, PromptKind::Long, kExtractionLong);
  add(Phase::Extraction, PromptKind::Short, kExtractionShort);
  add(Phase::Generation, PromptKind::Long, kGenerationLong);
  add(Phase::Generation, PromptKind::Short, kGenerationShort);
  add(Phase::Exploration, PromptKind::Long, kExplorationLong);
  add(Phase::Exploration, PromptKind::Short, kExplorationShort);

  auto fb = [&](FeedbackLabel l, std::string_view body) {
    set.feedback_.insert_or_assign(l, PromptTemplate(phase_of(l), PromptKind::Feedback, std::string(body), l));
  };
  fb(FeedbackLabel::NoStateError, kNoStateError);
  fb(FeedbackLabel::NotMergeSuggestion, kNotMergeSuggestion);
  fb(FeedbackLabel::ShouldMergeSuggestion, kShouldMergeSuggestion);
  fb(FeedbackLabel::EmptyError, kEmptyError);
  fb(FeedbackLabel::InvalidSuggestion, kInvalidSuggestion);
  fb(FeedbackLabel::NoInputError, kNoInputError);
  fb(FeedbackLabel::BetterInputSuggestion, kBetterInputSuggestion);

  set.few_shots_[Phase::Extraction] = std::string(kExtractionFewShots);
  set.few_shots_[Phase::Generation] = generation_few_shots();
  set.few_shots_[Phase::Exploration] = std::string(kExplorationFewShots);
  return set;
}

void TemplateSet::set_file(const std::string& name, std::string content) {
  for (Phase p : kPromptPhases) {
    const std::string stem = file_stem(p);
    if (name == stem + ".long.txt") {
      prompts_.insert_or_assign(std::pair{p, PromptKind::Long}, PromptTemplate(p, PromptKind::Long, std::move(content)));
      return;
    }
    if (name == stem + ".short.txt") {
      prompts_.insert_or_assign(std::pair{p, PromptKind::Short},
                                PromptTemplate(p, PromptKind::Short, std::move(content)));
      return;
    }
    if (name == stem + ".few_shots.txt") {
      few_shots_[p] = std::move(content);
      return;
    }
  }
  for (FeedbackLabel l : kFeedbackLabels) {
    const std::string expected = file_stem(phase_of(l)) + ".feedback." + std::string(to_string(l)) + ".txt";
    if (name == expected) {
      feedback_.insert_or_assign(l, PromptTemplate(phase_of(l), PromptKind::Feedback, std::move(content), l));
      return;
    }
  }
  throw TemplateError("unrecognized template file " + name);
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw TemplateError("not a directory: " + dir.string());
  TemplateSet set = defaults();
  std::set<std::string> known;
  for (const auto& [name, _] : set.files()) known.insert(name);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    for (Phase p : kPromptPhases) {
      if (name.rfind(file_stem(p) + ".", 0) == 0 && !known.count(name)) throw TemplateError("unknown template file " + name);
    }
  }
  for (const auto& [name, _] : set.files()) {
    const auto path = dir / name;
    if (std::filesystem::exists(path)) set.set_file(name, read_file(path));
  }
  return set;
}

void TemplateSet::save_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files()) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw TemplateError("cannot write " + (dir / name).string());
    out << content << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> TemplateSet::files() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (Phase p : kPromptPhases) {
    const std::string stem = file_stem(p);
    out.emplace_back(stem + ".long.txt", prompt(p, PromptKind::Long).body());
    out.emplace_back(stem + ".short.txt", prompt(p, PromptKind::Short).body());
    out.emplace_back(stem + ".few_shots.txt", few_shots(p));
  }
  for (FeedbackLabel l : kFeedbackLabels) {
    out.emplace_back(file_stem(phase_of(l)) + ".feedback." + std::string(to_string(l)) + ".txt",
                     feedback(l).body());
  }
  return out;
}

const PromptTemplate& TemplateSet::prompt(Phase phase, PromptKind kind) const {
  auto it = prompts_.find({phase, kind});
  if (it == prompts_.end()) {
    throw TemplateError("no " + std::string(to_string(kind)) + " template for " + std::string(to_string(phase)));
  }
  return it->second;
}

const PromptTemplate& TemplateSet::feedback(FeedbackLabel label) const { return feedback_.at(label); }

const std::string& TemplateSet::few_shots(Phase phase) const {
  auto it = few_shots_.find(phase);
  if (it == few_shots_.end()) throw TemplateError("no few-shots for " + std::string(to_string(phase)));
  return it->second;
}

}  // namespace vui::llm
