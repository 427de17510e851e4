#include <gtest/gtest.h>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/graphviz.hpp>
#include <map>
#include <sstream>

#include "vui/error.hpp"
#include "vui/model.hpp"
#include "vui/rng.hpp"
#include "vui/text.hpp"

using namespace vui;
using namespace vui::model;

namespace {

struct Vertex {
  std::string node_id;
  std::string label;
  std::string shape;
};
struct Edge {
  std::string label;
};
using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS, Vertex, Edge>;

Graph parse_dot(const std::string& dot) {
  Graph g;
  boost::dynamic_properties dp(boost::ignore_other_properties);
  dp.property("node_id", boost::get(&Vertex::node_id, g));
  dp.property("label", boost::get(&Vertex::label, g));
  dp.property("shape", boost::get(&Vertex::shape, g));
  dp.property("label", boost::get(&Edge::label, g));
  std::istringstream in(dot);
  if (!boost::read_graphviz(in, g, dp, "node_id")) throw std::runtime_error("graphviz parse failed");
  return g;
}

}  // namespace

TEST(BehaviorModel, StartsWithInitialState) {
  BehaviorModel m;
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.state(m.initial()).label, kStartLabel);
  EXPECT_TRUE(m.validate().empty());
}

TEST(BehaviorModel, EnsureStateIsIdempotentAndCaseInsensitive) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Welcome! Walk or play?");
  EXPECT_EQ(m.ensure_state("welcome!   walk or PLAY?"), a);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_THROW(m.ensure_state("   "), EmptyLabel);
}

TEST(BehaviorModel, MergeKeepsLabelAndIndexesVariant) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Menu one");
  m.merge_output("Menu one, again", a);
  EXPECT_EQ(m.state(a).label, "Menu one");
  EXPECT_EQ(m.find_state("MENU ONE, AGAIN"), a);
  EXPECT_EQ(m.state(a).variants.size(), 2u);
  m.merge_output("Menu one, again", a);
  EXPECT_EQ(m.state(a).variants.size(), 2u);
}

TEST(BehaviorModel, MergeIntoSecondOwnerConflicts) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  const StateId b = m.ensure_state("B");
  EXPECT_THROW(m.merge_output("a", b), VariantConflict);
  EXPECT_THROW(m.merge_output("", a), EmptyLabel);
  EXPECT_THROW(m.merge_output("x", StateId{9}), UnknownState);
}

TEST(BehaviorModel, AddInputDeduplicatesByNormalizedPhrase) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  EXPECT_TRUE(m.add_input(a, "Walk", Origin::Gateway));
  EXPECT_FALSE(m.add_input(a, " walk ", Origin::Fallback));
  ASSERT_EQ(m.sigma(a).size(), 1u);
  EXPECT_EQ(m.sigma(a)[0].validity, Validity::Unknown);
  EXPECT_EQ(m.sigma(a)[0].origin, Origin::Gateway);
  EXPECT_THROW(m.add_input(a, "  ", Origin::Gateway), InvalidArgument);
}

TEST(BehaviorModel, RecordInteractionCountsAndJudges) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  const StateId b = m.ensure_state("B");
  m.add_input(a, "go", Origin::Gateway);
  m.add_input(a, "stay", Origin::Gateway);
  m.record_interaction(a, "go", "B again", b);
  m.record_interaction(a, "go", "B", b);
  m.record_interaction(a, "stay", "A", a);
  EXPECT_EQ(m.find_input(a, "go")->invocation_count, 2u);
  EXPECT_EQ(m.find_input(a, "go")->validity, Validity::Valid);
  EXPECT_EQ(m.find_input(a, "stay")->validity, Validity::Invalid);
  EXPECT_EQ(m.find_state("b again"), b);
  ASSERT_EQ(m.delta_from(a).size(), 2u);
  EXPECT_EQ(m.delta_from(a)[0].count, 2u);
  EXPECT_TRUE(m.validate().empty());
}

TEST(BehaviorModel, ConfusionTargetIsInvalid) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  const StateId c = m.ensure_state("Sorry, I didn't get that.");
  m.mark_confusion(c);
  m.add_input(a, "blah", Origin::Gateway);
  m.record_interaction(a, "blah", "Sorry, I didn't get that.", c);
  EXPECT_EQ(m.find_input(a, "blah")->validity, Validity::Invalid);
}

TEST(BehaviorModel, RecordingRequiresKnownInputAndStates) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  EXPECT_THROW(m.record_interaction(a, "nope", "A", a), UnknownInput);
  m.add_input(a, "go", Origin::Gateway);
  EXPECT_THROW(m.record_interaction(a, "go", "X", StateId{5}), UnknownState);
}

TEST(BehaviorModel, SetValidityGuardsUnknown) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  m.add_input(a, "go", Origin::Gateway);
  EXPECT_THROW(m.set_validity(a, "go", Validity::Valid), InvalidArgument);
  m.record_interaction(a, "go", "A", a);
  EXPECT_THROW(m.set_validity(a, "go", Validity::Unknown), InvalidArgument);
  m.set_validity(a, "go", Validity::Valid);
  EXPECT_EQ(m.find_input(a, "go")->validity, Validity::Valid);
}

TEST(BehaviorModel, FinalsAreListed) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  m.mark_final(a);
  EXPECT_EQ(m.finals(), std::vector<StateId>{a});
}

TEST(BehaviorModel, JsonRoundTripIsIdentity) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Welcome. \"Walk\" or play?");
  const StateId b = m.ensure_state("Bye ✓");
  m.mark_final(b);
  m.add_input(m.initial(), kLaunchInput, Origin::Fallback);
  m.record_interaction(m.initial(), kLaunchInput, "Welcome. \"Walk\" or play?", a);
  m.add_input(a, "walk", Origin::Gateway);
  m.record_interaction(a, "walk", "bye ✓", b);
  const BehaviorModel back = BehaviorModel::from_json(m.to_json());
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.to_json(), m.to_json());
  EXPECT_EQ(back.find_state("welcome. \"walk\" or play?"), a);
}

TEST(BehaviorModel, MalformedJsonIsRejected) {
  EXPECT_THROW(BehaviorModel::from_json("{"), ParseError);
  EXPECT_THROW(BehaviorModel::from_json("[]"), ParseError);
}

TEST(BehaviorModel, DotParsesAsGraph) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Say \"go\" or \\stay\\");
  const StateId b = m.ensure_state("End");
  m.mark_final(b);
  m.add_input(a, "go", Origin::Gateway);
  m.record_interaction(a, "go", "End", b);
  const Graph g = parse_dot(m.to_dot());
  EXPECT_EQ(boost::num_vertices(g), m.size());
  EXPECT_EQ(boost::num_edges(g), m.transitions().size());
  bool found = false;
  for (auto v : boost::make_iterator_range(boost::vertices(g))) {
    // Label attributes are escStrings, so backslashes stay doubled.
    if (g[v].label == "Say \"go\" or \\\\stay\\\\") found = true;
    if (g[v].label == "End") EXPECT_EQ(g[v].shape, "doublecircle");
  }
  EXPECT_TRUE(found);
}

// Random operation sequences checked against an independent tally of what
// each operation must have done.
TEST(BehaviorModel, RandomOperationSequencesKeepInvariants) {
  const std::vector<std::string> texts = {"Alpha", "alpha ", "Beta", "Gamma?", "Sorry, I didn't get that.",
                                          "Delta!", "Echo", "beta"};
  const std::vector<std::string> phrases = {"yes", "no", "Walk", "walk", "main menu", "stop"};
  for (int seq = 0; seq < 1000; ++seq) {
    Rng rng(derive_seed(2024, "seq:" + std::to_string(seq)));
    BehaviorModel m;
    std::map<std::pair<std::uint32_t, std::string>, std::uint32_t> invocations;
    std::uint32_t records = 0;
    for (int op = 0; op < 40; ++op) {
      const StateId s{static_cast<std::uint32_t>(rng.below(m.size() + 1))};
      const std::string& t = texts[rng.below(texts.size())];
      const std::string& p = phrases[rng.below(phrases.size())];
      try {
        switch (rng.below(7)) {
          case 0: m.ensure_state(t); break;
          case 1: m.merge_output(t, s); break;
          case 2: m.add_input(s, p, rng.chance(0.5) ? Origin::Gateway : Origin::Fallback); break;
          case 3: {
            const StateId to{static_cast<std::uint32_t>(rng.below(m.size()))};
            m.record_interaction(s, p, t, to);
            ++invocations[{s.value, text::normalize(p)}];
            ++records;
            break;
          }
          case 4: m.mark_final(s); break;
          case 5: m.mark_confusion(s); break;
          case 6: m.set_validity(s, p, rng.chance(0.5) ? Validity::Valid : Validity::Invalid); break;
        }
      } catch (const Error&) {
      }
      const auto errors = m.validate();
      ASSERT_TRUE(errors.empty()) << "sequence " << seq << " op " << op << ": " << errors.front();
    }
    std::uint32_t total = 0;
    for (const auto& tr : m.transitions()) total += tr.count;
    ASSERT_EQ(total, records);
    for (const auto& [key, n] : invocations) {
      const auto* rec = m.find_input(StateId{key.first}, key.second);
      ASSERT_NE(rec, nullptr);
      ASSERT_EQ(rec->invocation_count, n);
    }
    ASSERT_EQ(BehaviorModel::from_json(m.to_json()), m);
    ASSERT_EQ(boost::num_vertices(parse_dot(m.to_dot())), m.size());
  }
}
