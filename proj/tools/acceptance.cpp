// Prints one PASS/FAIL line per acceptance criterion; exits 0 only when all
// of them pass.

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/graphviz.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "vui/error.hpp"
#include "vui/experiment.hpp"
#include "vui/exploration.hpp"
#include "vui/extraction.hpp"
#include "vui/input_generation.hpp"
#include "vui/rng.hpp"
#include "vui/runner.hpp"
#include "vui/simulator.hpp"
#include "vui/text.hpp"

using namespace vui;
using runner::Budget;
using runner::TestReport;

namespace {

constexpr int kRounds = 20;
constexpr std::uint64_t kRunSeed = 0;
constexpr int kRandomSeeds = 32;

sim::CorpusOptions acceptance_corpus() {
  sim::CorpusOptions o;
  o.seed = 42;
  o.count = 10;
  o.states = {5, 15};
  o.variants = {2, 4};
  o.branching = {2, 4};
  return o;
}

llm::GatewayConfig backend(llm::BackendKind kind, std::uint64_t seed = 0, double error_rate = 0.0) {
  llm::GatewayConfig c;
  c.backend = kind;
  c.seed = seed;
  c.error_rate = error_rate;
  c.retry_backoff_ms = 0;
  return c;
}

const Budget kBudget{kRounds, std::nullopt};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<TestReport> run(const std::vector<sim::SkillSpec>& corpus, std::string_view mode,
                            const llm::GatewayConfig& c, std::uint64_t seed = kRunSeed) {
  return runner::run_corpus(corpus, mode, c, kBudget, seed);
}

Outcome coverage_at_20(const std::vector<sim::SkillSpec>& corpus) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto reports = run(corpus, "elevate", backend(llm::BackendKind::Perfect));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rate = runner::mean_rate_at(reports, kRounds);
  return {rate >= 0.80 && secs < 10.0, fmt("mean coverage %.4f (>= 0.80), %.2f s (< 10 s)", rate, secs)};
}

Outcome baseline_separation(const std::vector<sim::SkillSpec>& corpus) {
  const auto perfect = backend(llm::BackendKind::Perfect);
  const double elevate = runner::mean_rate_at(run(corpus, "elevate", perfect), kRounds);
  const double weighted = runner::mean_rate_at(run(corpus, "weighted", perfect), kRounds);
  double random_sum = 0.0;
  double random_seed0 = 0.0;
  for (int s = 0; s < kRandomSeeds; ++s) {
    const double r = runner::mean_rate_at(run(corpus, "random", perfect, s), kRounds);
    if (s == 0) random_seed0 = r;
    random_sum += r;
  }
  const double random = random_sum / kRandomSeeds;
  const bool pass = elevate - weighted >= 0.05 && elevate - random >= 0.10;
  return {pass, fmt("elevate %.4f, weighted %.4f, random %.4f over 32 seeds (seed 0: %.4f)", elevate, weighted,
                    random, random_seed0)};
}

Outcome semantic_compression() {
  auto o = acceptance_corpus();
  o.variants = {3, 3};
  const auto corpus = sim::gen_corpus(o);
  const auto reports = run(corpus, "weighted", backend(llm::BackendKind::Perfect));
  std::size_t sentences = 0;
  std::size_t semantic = 0;
  bool exact = true;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto truth = std::make_shared<sim::TruthIndex>(corpus[i]);
    const auto c = backend(llm::BackendKind::Perfect);
    llm::Gateway g(c, llm::make_backend(c, truth));
    const auto found = runner::discovered_sentences(reports[i]);
    const auto labels = runner::canonicalize(found, g);
    sentences += found.size();
    semantic += labels.size();
    std::set<std::string> visited;
    for (const auto& e : reports[i].eval) visited.insert(e.truth_state);
    std::set<std::string> label_truth;
    for (const auto& l : labels) label_truth.insert(truth->truth_of(l).value_or("?"));
    exact &= label_truth == visited && labels.size() == visited.size();
  }
  const double ratio = semantic == 0 ? 0.0 : static_cast<double>(sentences) / static_cast<double>(semantic);
  return {ratio >= 2.0 && exact,
          fmt("%.0f sentence states -> %.0f semantic states (x%.2f >= 2), matches visited truth: ", sentences, semantic,
              ratio) +
              (exact ? "yes" : "no")};
}

// Hand-built states for every checker branch.
Outcome checker_branches() {
  using model::Origin;
  using model::StateId;
  using model::Validity;
  int passed = 0;
  int total = 0;
  std::string failed;
  auto check = [&](const std::string& name, bool ok) {
    ++total;
    passed += ok;
    if (!ok) failed += " " + name;
  };

  model::BehaviorModel m;
  const StateId welcome = m.ensure_state("Do you want to walk or play?");
  m.add_input(welcome, "walk", Origin::Gateway);
  m.add_input(welcome, "play", Origin::Gateway);
  m.add_input(welcome, "yes", Origin::Gateway);
  const StateId park = m.ensure_state("At the park. Ball or bench?");
  m.add_input(park, "ball", Origin::Gateway);
  m.add_input(park, "bench", Origin::Gateway);
  m.record_interaction(welcome, "walk", "At the park. Ball or bench?", park);
  m.set_validity(welcome, "walk", Validity::Valid);

  using FK = extract::FilterVerdict::Kind;
  check("NoStateError", extract::state_filter("Elsewhere", "Bye.", m, welcome, "play", {}).kind == FK::NoStateError);
  check("NotMergeSuggestion",
        extract::state_filter("At the park. Ball or bench?", "Bye.", m, welcome, "play", {"goodbye"}) ==
            extract::FilterVerdict{FK::NotMergeSuggestion, park});
  check("ShouldMergeSuggestion",
        extract::state_filter("Park time! Ball or bench?", "Park time! Ball or bench?", m, welcome, "walk",
                              {"ball", "bench"}) == extract::FilterVerdict{FK::ShouldMergeSuggestion, park});
  check("Accept(filter)", extract::state_filter("Toss or fetch?", "Toss or fetch?", m, welcome, "play",
                                                {"toss", "fetch"}) == extract::FilterVerdict{FK::Accept, std::nullopt});

  check("EmptyError", inputs::normalize_inputs({"", "far too many words for one reply"}, 5).empty());
  m.record_interaction(welcome, "yes", "Do you want to walk or play?", welcome);
  check("InvalidSuggestion", inputs::check_input_outcome(m, welcome, "yes", welcome, "Do you want to walk or play?") ==
                                 inputs::InputCheck::invalid("yes"));
  check("Ok(input)",
        inputs::check_input_outcome(m, welcome, "walk", park, "At the park. Ball or bench?") == inputs::InputCheck::ok());

  using SK = explore::SelectVerdict::Kind;
  check("NoInputError", explore::better_input_checker("jump", welcome, m).kind == SK::NoInputError);
  check("BetterInputSuggestion",
        explore::better_input_checker("walk", welcome, m) == explore::SelectVerdict{SK::BetterInputSuggestion, "play"});
  check("Accept(select)", explore::better_input_checker("play", welcome, m) == explore::SelectVerdict{});

  return {passed == total, std::to_string(passed) + "/" + std::to_string(total) + " branches" +
                               (failed.empty() ? "" : ", failed:" + failed)};
}

Outcome feedback_recovery(const std::vector<sim::SkillSpec>& corpus) {
  double worst_gap = 0.0;
  int fallbacks = 0;
  int invocations = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto perfect = run(corpus, "elevate", backend(llm::BackendKind::Perfect, seed), seed);
    const auto noisy = run(corpus, "elevate", backend(llm::BackendKind::Noisy, seed, 0.3), seed);
    worst_gap = std::max(worst_gap, runner::mean_rate_at(perfect, kRounds) - runner::mean_rate_at(noisy, kRounds));
    for (const auto& r : noisy) {
      fallbacks += r.stats.fallbacks();
      invocations += r.stats.phase_invocations();
    }
  }
  const double share = invocations == 0 ? 0.0 : static_cast<double>(fallbacks) / invocations;
  return {worst_gap <= 0.10 && share < 0.20,
          fmt("worst gap %.4f (<= 0.10), fallbacks %.0f/%.0f = %.4f (< 0.20)", worst_gap, fallbacks, invocations,
              share)};
}

Outcome determinism(const std::vector<sim::SkillSpec>& corpus) {
  int identical = 0;
  int replayed = 0;
  int total = 0;
  for (const auto& c : {backend(llm::BackendKind::Perfect, 7), backend(llm::BackendKind::Noisy, 7, 0.3)}) {
    for (const char* mode : {"elevate", "chatbot", "random", "weighted"}) {
      const auto a = run(corpus, mode, c, 7);
      const auto b = run(corpus, mode, c, 7);
      for (std::size_t i = 0; i < a.size(); ++i) {
        ++total;
        const auto text = runner::report_to_json(a[i]);
        identical += text == runner::report_to_json(b[i]);
        replayed += runner::replay(runner::report_from_json(text).transcript) == a[i].model;
      }
    }
  }
  return {identical == total && replayed == total,
          fmt("%.0f/%.0f byte-identical, %.0f/%.0f replays exact", identical, total, replayed, total)};
}

struct Vertex {
  std::string node_id;
  std::string label;
};
struct Edge {
  std::string label;
};
using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS, Vertex, Edge>;

bool dot_parses(const model::BehaviorModel& m) {
  Graph g;
  boost::dynamic_properties dp(boost::ignore_other_properties);
  dp.property("node_id", boost::get(&Vertex::node_id, g));
  dp.property("label", boost::get(&Vertex::label, g));
  dp.property("label", boost::get(&Edge::label, g));
  std::istringstream in(m.to_dot());
  try {
    return boost::read_graphviz(in, g, dp, "node_id") && boost::num_vertices(g) == m.size() &&
           boost::num_edges(g) == m.transitions().size();
  } catch (const boost::graph_exception&) {
    return false;
  }
}

Outcome model_properties() {
  using model::Origin;
  using model::StateId;
  const std::vector<std::string> texts = {"Alpha", "alpha ", "Beta \"quoted\"", "Gamma?", "Sorry, I didn't get that.",
                                          "Delta!", "Echo\\", "beta \"QUOTED\""};
  const std::vector<std::string> phrases = {"yes", "no", "Walk", "walk", "main menu", "stop"};
  int invariant_ok = 0;
  int roundtrip_ok = 0;
  int dot_ok = 0;
  const int sequences = 1000;
  for (int seq = 0; seq < sequences; ++seq) {
    Rng rng(derive_seed(7, "acceptance-seq:" + std::to_string(seq)));
    model::BehaviorModel m;
    bool invariants = true;
    for (int op = 0; op < 40; ++op) {
      const StateId s{static_cast<std::uint32_t>(rng.below(m.size() + 1))};
      const std::string& t = texts[rng.below(texts.size())];
      const std::string& p = phrases[rng.below(phrases.size())];
      try {
        switch (rng.below(7)) {
          case 0: m.ensure_state(t); break;
          case 1: m.merge_output(t, s); break;
          case 2: m.add_input(s, p, rng.chance(0.5) ? Origin::Gateway : Origin::Fallback); break;
          case 3: m.record_interaction(s, p, t, StateId{static_cast<std::uint32_t>(rng.below(m.size()))}); break;
          case 4: m.mark_final(s); break;
          case 5: m.mark_confusion(s); break;
          case 6:
            m.set_validity(s, p, rng.chance(0.5) ? model::Validity::Valid : model::Validity::Invalid);
            break;
        }
      } catch (const Error&) {
      }
      invariants &= m.validate().empty();
    }
    invariant_ok += invariants;
    roundtrip_ok += model::BehaviorModel::from_json(m.to_json()) == m;
    dot_ok += dot_parses(m);
  }
  return {invariant_ok == sequences && roundtrip_ok == sequences && dot_ok == sequences,
          fmt("invariants %.0f/1000, JSON round-trip %.0f/1000, DOT parse %.0f/1000", invariant_ok, roundtrip_ok,
              dot_ok)};
}

Outcome question_goldens() {
  std::ifstream in(std::filesystem::path(VUI_SOURCE_DIR) / "tests" / "data" / "question_goldens.json");
  if (!in) return {false, "golden file missing"};
  const auto goldens = nlohmann::json::parse(in);
  std::map<std::string, int> per_type;
  std::set<std::string> mixed;
  int matched = 0;
  for (const auto& g : goldens) {
    const std::string type = g.at("type");
    const std::string sentence = g.at("sentence");
    const bool is_mixed = type.find('+') != std::string::npos;
    ++per_type[is_mixed ? "mixed" : type];
    if (is_mixed) mixed.insert(type);
    matched += inputs::rule_based_inputs(sentence) == g.at("inputs").get<std::vector<std::string>>() &&
               inputs::to_string(inputs::classify_question(sentence)) == type;
  }
  bool balanced = per_type.size() == 5 && mixed.size() == 3;
  for (const auto& [type, n] : per_type) balanced &= n == 5;
  return {matched == 25 && goldens.size() == 25 && balanced,
          fmt("%.0f/%.0f match, 5 per type: ", matched, static_cast<double>(goldens.size())) +
              (balanced ? "yes" : "no")};
}

}  // namespace

int main() {
  const auto corpus = sim::gen_corpus(acceptance_corpus());
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"coverage at 20 rounds", [&] { return coverage_at_20(corpus); }},
      {"baseline separation", [&] { return baseline_separation(corpus); }},
      {"semantic compression", [] { return semantic_compression(); }},
      {"checker branch coverage", [] { return checker_branches(); }},
      {"feedback recovery", [&] { return feedback_recovery(corpus); }},
      {"determinism and replay", [&] { return determinism(corpus); }},
      {"model and format properties", [] { return model_properties(); }},
      {"question-type goldens", [] { return question_goldens(); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all &= o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
