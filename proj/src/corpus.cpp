#include <algorithm>
#include <array>
#include <cctype>

#include "vui/error.hpp"
#include "vui/simulator.hpp"
#include "vui/text.hpp"

namespace vui::sim {

namespace {

constexpr std::array<std::string_view, 24> kSkillNames = {
    "Pet Buddy",     "Daily Chef",    "Space Facts",    "Garden Helper", "Music Box",    "City Guide",
    "Fitness Coach", "Story Time",    "Weather Pal",    "Quiz Master",   "Movie Night",  "Book Club",
    "Travel Planner", "Ocean Explorer", "History Buff", "Kitchen Timer", "Word Wizard",  "Sleep Sounds",
    "Trivia Time",   "Bird Watcher",  "Yoga Flow",      "Coffee Corner", "Art Studio",   "Game Room",
};

constexpr std::array<std::string_view, 60> kTopics = {
    "recipes",    "desserts",   "planets",     "comets",     "galaxies",    "rockets",    "roses",
    "tulips",     "jazz",       "blues",       "rock music", "museums",     "parks",      "bridges",
    "stretching", "cardio",     "fairy tales", "legends",    "forecasts",   "storms",     "sunsets",
    "riddles",    "puzzles",    "comedies",    "thrillers",  "novels",      "poems",      "beaches",
    "mountains",  "islands",    "dolphins",    "sharks",     "castles",     "pirates",    "inventions",
    "timers",     "spelling",   "synonyms",    "rain sounds", "lullabies",  "parrots",    "owls",
    "breathing",  "coffee beans", "espresso",  "painting",   "sketching",   "board games", "card games",
    "soups",      "salads",     "volcanoes",   "glaciers",   "deserts",     "jungles",    "robots",
    "dinosaurs",  "pyramids",   "trains",      "kites",
};

constexpr std::array<std::string_view, 3> kExitWords = {"goodbye", "stop", "exit"};

constexpr std::array<std::array<std::string_view, 4>, 3> kFarewells = {{
    {"Goodbye! Thanks for using {skill}.", "Thanks for visiting {skill}. See you soon!", "Bye for now from {skill}!",
     "{skill} says goodbye. Have a great day!"},
    {"Session closed. {skill} hopes you had fun.", "All done here at {skill}. Take care!",
     "{skill} is signing off now.", "That is the end of {skill} for today."},
    {"{skill} will be here when you need it. Farewell!", "Farewell from {skill}.",
     "{skill} has finished. Until next time!", "Until next time, {skill} is closing."},
}};

constexpr std::array<std::string_view, 4> kWelcomeLeads = {"Welcome to {skill}.", "Hi, this is {skill}!",
                                                           "Hello from {skill}.", "{skill} here, welcome!"};
constexpr std::array<std::string_view, 4> kTopicLeads = {"You are in {topic}.", "This is the {topic} corner.",
                                                         "Welcome to {topic}!", "Let's talk about {topic}."};
constexpr std::array<std::string_view, 3> kConfusionLeads = {
    "Sorry, I didn't get that.", "Hmm, I'm not sure what you mean.", "Sorry, I didn't understand."};

// Question families. Every template of one family yields the same
// rule-based replies for the same option list.
enum class Family { Selection, YesNoSelection, InstructionSelection, QuotedInstruction, YesNo };

constexpr std::array<std::string_view, 4> kSelection = {"{List}?", "Which one would you like: {list}?",
                                                        "What would you like, {list}?", "Which do you prefer: {list}?"};
constexpr std::array<std::string_view, 4> kYesNoSelection = {"Do you want {list}?", "Would you like {list}?",
                                                             "Do you prefer {list}?", "Would you rather have {list}?"};
constexpr std::array<std::string_view, 4> kInstructionSelection = {"You can say {list}.", "Just say {list}.",
                                                                   "Please say {list}.", "To continue, say {list}."};
constexpr std::array<std::string_view, 4> kQuotedInstruction = {"Say {quoted}.", "Just say {quoted}.",
                                                                "You can say {quoted}.", "Please say {quoted}."};
constexpr std::array<std::string_view, 4> kYesNo = {"Would you like to explore {first}?", "Do you want to visit {first}?",
                                                    "Shall we look at {first}?", "Are you ready for {first}?"};

std::string fill(std::string_view tmpl, std::string_view key, std::string_view value) {
  std::string out(tmpl);
  const std::string k = "{" + std::string(key) + "}";
  for (auto pos = out.find(k); pos != std::string::npos; pos = out.find(k, pos + value.size())) {
    out.replace(pos, k.size(), value);
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string list_phrase(const std::vector<std::string>& items) {
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " or " + items[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) out += items[i] + ", ";
  return out + "or " + items.back();
}

std::string quoted_phrase(const std::vector<std::string>& items) {
  std::vector<std::string> q;
  for (const auto& i : items) q.push_back("\"" + i + "\"");
  return text::join(q, ", ");
}

struct Edge {
  enum class Kind { Child, Back, Menu, Jump, Exit };
  Kind kind;
  int to;  // index into the state table
  std::string option;
};

struct Plan {
  std::string id;
  std::string topic;  // empty for welcome and finals
  bool is_final = false;
  int parent = -1;
  std::vector<Edge> edges;
};

std::string question_for(Family family, std::size_t variant, const std::vector<std::string>& options,
                         std::string_view first_target) {
  switch (family) {
    case Family::Selection: {
      std::string q = fill(kSelection[variant], "list", list_phrase(options));
      return fill(q, "List", capitalize(list_phrase(options)));
    }
    case Family::YesNoSelection: return fill(kYesNoSelection[variant], "list", list_phrase(options));
    case Family::InstructionSelection: return fill(kInstructionSelection[variant], "list", list_phrase(options));
    case Family::QuotedInstruction: return fill(kQuotedInstruction[variant], "quoted", quoted_phrase(options));
    case Family::YesNo: return fill(kYesNo[variant], "first", first_target);
  }
  return {};
}

SkillSpec make_skill(const CorpusOptions& o, int index) {
  Rng rng(derive_seed(o.seed, "skill:" + std::to_string(index)));
  const std::string skill = std::string(kSkillNames[static_cast<std::size_t>(index) % kSkillNames.size()]) +
                            (index >= static_cast<int>(kSkillNames.size())
                                 ? " " + std::to_string(index / static_cast<int>(kSkillNames.size()) + 1)
                                 : "");

  const int n = rng.between(o.states.first, o.states.second);
  const int finals = std::min<int>(n >= 10 ? 2 : 1, static_cast<int>(kFarewells.size()));
  const int m = n - finals;

  std::vector<std::string_view> topics(kTopics.begin(), kTopics.end());
  for (std::size_t i = topics.size(); i > 1; --i) std::swap(topics[i - 1], topics[rng.below(i)]);

  std::vector<Plan> plan(static_cast<std::size_t>(n));
  for (int u = 0; u < m; ++u) {
    plan[u].id = u == 0 ? "welcome" : "s" + std::to_string(u);
    if (u > 0) plan[u].topic = std::string(topics[static_cast<std::size_t>(u - 1)]);
  }
  for (int k = 0; k < finals; ++k) {
    plan[m + k].id = "end" + std::to_string(k + 1);
    plan[m + k].is_final = true;
  }

  std::vector<int> slots(static_cast<std::size_t>(m));
  for (int u = 0; u < m; ++u) slots[u] = rng.between(o.branching.first, o.branching.second);

  // Breadth-first tree over the non-final states.
  int next = 1;
  for (int u = 0; u < m; ++u) {
    while (slots[u] > 0 && next < m) {
      plan[next].parent = u;
      plan[u].edges.push_back({Edge::Kind::Child, next, plan[next].topic});
      --slots[u];
      ++next;
    }
  }
  for (int u = 1; u < m; ++u) {
    if (slots[u] > 0) {
      plan[u].edges.push_back({Edge::Kind::Back, plan[u].parent, "go back"});
      --slots[u];
    }
  }
  for (int k = 0; k < finals; ++k) {
    int host = -1;
    for (int u = m - 1; u >= 0 && host < 0; --u) {
      if (slots[u] > 0) host = u;
    }
    if (host < 0) host = m - 1;
    else --slots[host];
    plan[host].edges.push_back({Edge::Kind::Exit, m + k, std::string(kExitWords[k])});
  }
  auto has_target = [&](int u, int t) {
    return std::any_of(plan[u].edges.begin(), plan[u].edges.end(), [&](const Edge& e) { return e.to == t; });
  };
  for (int u = 0; u < m; ++u) {
    while (slots[u] > 0) {
      --slots[u];
      if (u != 0 && !has_target(u, 0)) {
        plan[u].edges.push_back({Edge::Kind::Menu, 0, "main menu"});
        continue;
      }
      std::vector<int> candidates;
      for (int t = 1; t < m; ++t) {
        if (t != u && !has_target(u, t)) candidates.push_back(t);
      }
      if (!candidates.empty()) {
        const int t = candidates[rng.below(candidates.size())];
        plan[u].edges.push_back({Edge::Kind::Jump, t, plan[t].topic});
      } else if (!has_target(u, m)) {
        plan[u].edges.push_back({Edge::Kind::Exit, m, std::string(kExitWords[0])});
      }
    }
    std::stable_sort(plan[u].edges.begin(), plan[u].edges.end(), [](const Edge& a, const Edge& b) {
      auto rank = [](Edge::Kind k) {
        switch (k) {
          case Edge::Kind::Child: return 0;
          case Edge::Kind::Jump: return 1;
          case Edge::Kind::Back: return 2;
          case Edge::Kind::Menu: return 3;
          case Edge::Kind::Exit: return 4;
        }
        return 5;
      };
      return rank(a.kind) < rank(b.kind);
    });
  }

  auto describe = [&](const Edge& e) -> std::string {
    switch (e.kind) {
      case Edge::Kind::Child:
      case Edge::Kind::Jump: return e.option;
      case Edge::Kind::Back: return "the previous menu";
      case Edge::Kind::Menu: return "the main menu";
      case Edge::Kind::Exit: return "the exit";
    }
    return e.option;
  };

  SkillSpec spec;
  spec.name = skill;
  spec.invocation = "open " + text::to_lower(skill);
  spec.initial = "welcome";
  for (int u = 0; u < n; ++u) {
    const Plan& p = plan[u];
    SpecState s;
    s.id = p.id;
    s.is_final = p.is_final;
    const auto variants = static_cast<std::size_t>(std::clamp(rng.between(o.variants.first, o.variants.second), 1, 4));
    if (p.is_final) {
      for (std::size_t v = 0; v < variants; ++v) s.utterances.push_back(fill(kFarewells[u - m][v], "skill", skill));
      spec.states.push_back(std::move(s));
      continue;
    }

    std::vector<std::string> options;
    for (const auto& e : p.edges) options.push_back(e.option);
    const double r = rng.uniform();
    Family family = r < 0.35   ? Family::Selection
                    : r < 0.55 ? Family::YesNoSelection
                    : r < 0.75 ? Family::InstructionSelection
                    : r < 0.90 ? Family::QuotedInstruction
                               : Family::YesNo;
    if (family == Family::YesNo && p.edges.size() != 2) family = Family::Selection;

    std::vector<std::string> leads;
    for (std::size_t v = 0; v < variants; ++v) {
      leads.push_back(u == 0 ? fill(kWelcomeLeads[v], "skill", skill) : fill(kTopicLeads[v], "topic", p.topic));
    }
    std::vector<std::string> questions;
    for (std::size_t v = 0; v < variants; ++v) questions.push_back(question_for(family, v, options, describe(p.edges[0])));
    for (std::size_t v = 0; v < variants; ++v) s.utterances.push_back(leads[v] + " " + questions[v]);

    if (family == Family::YesNo) {
      s.transitions.push_back({{"yes"}, plan[p.edges[0].to].id});
      s.transitions.push_back({{"no"}, plan[p.edges[1].to].id});
    } else {
      for (const auto& e : p.edges) s.transitions.push_back({{e.option}, plan[e.to].id});
    }

    SpecFallback fb;
    fb.to = p.id;
    const std::size_t fallbacks = std::min<std::size_t>(2, variants);
    for (std::size_t v = 0; v < fallbacks; ++v) {
      fb.utterances.push_back(std::string(kConfusionLeads[v]) + " " + leads[v] + " " + questions[v]);
    }
    s.fallback = std::move(fb);
    spec.states.push_back(std::move(s));
  }
  return spec;
}

}  // namespace

std::vector<SkillSpec> gen_corpus(const CorpusOptions& o) {
  auto check_range = [](std::pair<int, int> r, int lo, int hi, const char* what) {
    if (r.first > r.second || r.first < lo || r.second > hi) {
      throw InvalidArgument(std::string(what) + " range must lie within [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
    }
  };
  if (o.count < 0) throw InvalidArgument("count must be non-negative");
  check_range(o.states, 3, static_cast<int>(kTopics.size()), "states");
  check_range(o.variants, 1, 4, "variants");
  check_range(o.branching, 2, 8, "branching");

  std::vector<SkillSpec> out;
  for (int i = 0; i < o.count; ++i) {
    // Round-trip through the loader so generated skills obey the same schema.
    out.push_back(load_spec(to_json(make_skill(o, i))));
  }
  return out;
}

}  // namespace vui::sim
