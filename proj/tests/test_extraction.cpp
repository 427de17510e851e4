#include <gtest/gtest.h>

#include "support.hpp"
#include "vui/extraction.hpp"

using namespace vui;
using namespace vui::extract;
using model::BehaviorModel;
using model::Origin;
using model::StateId;
using vui::testing::ScriptedBackend;
using Kind = FilterVerdict::Kind;

namespace {

// START --launch--> welcome {walk, play}; welcome --walk--> park {ball, bench}
struct Fixture {
  BehaviorModel m;
  StateId welcome, park;

  Fixture() {
    m.add_input(m.initial(), model::kLaunchInput, Origin::Fallback);
    welcome = m.ensure_state("Do you want to walk or play?");
    m.record_interaction(m.initial(), model::kLaunchInput, "Do you want to walk or play?", welcome);
    m.add_input(welcome, "walk", Origin::Gateway);
    m.add_input(welcome, "play", Origin::Gateway);
    park = m.ensure_state("At the park. Ball or bench?");
    m.record_interaction(welcome, "walk", "At the park. Ball or bench?", park);
    m.add_input(park, "ball", Origin::Gateway);
    m.add_input(park, "bench", Origin::Gateway);
  }
};

ExtractionResult run(const Fixture& f, std::vector<std::string> replies, ExtractionRequest req) {
  auto backend = std::make_shared<ScriptedBackend>(std::move(replies));
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Extraction);
  return extract_state(req, f.m, g, s);
}

}  // namespace

TEST(InputSimilarity, Jaccard) {
  EXPECT_DOUBLE_EQ(input_similarity({"a", "b"}, {"B", "c"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(input_similarity({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(input_similarity({"a"}, {}), 0.0);
}

TEST(StateFilter, UnknownCandidateIsNoStateError) {
  Fixture f;
  EXPECT_EQ(state_filter("Somewhere else", "Ready?", f.m, f.welcome, "play", {"yes"}),
            (FilterVerdict{Kind::NoStateError, std::nullopt}));
  EXPECT_EQ(state_filter("", "Ready?", f.m, f.welcome, "play", {"yes"}).kind, Kind::NoStateError);
}

TEST(StateFilter, DifferentInputsIsNotMergeSuggestion) {
  Fixture f;
  EXPECT_EQ(state_filter("At the park. Ball or bench?", "Bye now.", f.m, f.welcome, "play", {"goodbye"}),
            (FilterVerdict{Kind::NotMergeSuggestion, f.park}));
}

TEST(StateFilter, NewStateAfterKnownTransitionIsShouldMergeSuggestion) {
  Fixture f;
  EXPECT_EQ(state_filter("Park time! Ball or bench?", "Park time! Ball or bench?", f.m, f.welcome, "Walk",
                         {"ball", "bench"}),
            (FilterVerdict{Kind::ShouldMergeSuggestion, f.park}));
}

TEST(StateFilter, AcceptsMergeWithSameInputs) {
  Fixture f;
  EXPECT_EQ(state_filter("at the park.  ball or bench?", "Park time! Ball or bench?", f.m, f.welcome, "walk",
                         {"ball", "bench"}),
            (FilterVerdict{Kind::Accept, f.park}));
}

TEST(StateFilter, AcceptsNewStateOnFreshTransition) {
  Fixture f;
  EXPECT_EQ(state_filter("Toss or fetch?", "Toss or fetch?", f.m, f.welcome, "play", {"toss", "fetch"}),
            (FilterVerdict{Kind::Accept, std::nullopt}));
}

TEST(ExtractState, AcceptedMergeDecision) {
  Fixture f;
  const auto r = run(f, {"Output: At the park. Ball or bench?"},
                     {"Park time! Ball or bench?", {"ball", "bench"}, f.welcome, "play", false});
  EXPECT_EQ(r.decision, StateDecision::merged_into(f.park));
  EXPECT_EQ(r.llm_calls, 1);
  EXPECT_FALSE(r.used_fallback);
}

TEST(ExtractState, FeedbackLeadsToCorrection) {
  Fixture f;
  const auto r = run(f, {"Output: Nowhere", "Output: Park time! Ball or bench?", "Output: At the park. Ball or bench?"},
                     {"Park time! Ball or bench?", {"ball", "bench"}, f.welcome, "walk", false});
  ASSERT_EQ(r.verdicts.size(), 3u);
  EXPECT_EQ(r.verdicts[0].kind, Kind::NoStateError);
  EXPECT_EQ(r.verdicts[1].kind, Kind::ShouldMergeSuggestion);
  EXPECT_EQ(r.verdicts[2].kind, Kind::Accept);
  EXPECT_EQ(r.feedback_rounds, 2);
  EXPECT_EQ(r.decision, StateDecision::merged_into(f.park));
}

TEST(ExtractState, FeedbackNamesTheRejectedState) {
  Fixture f;
  auto backend = std::make_shared<ScriptedBackend>(
      std::vector<std::string>{"Output: At the park. Ball or bench?", "Output: Bye now."});
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Extraction);
  extract_state({"Bye now.", {"goodbye"}, f.welcome, "play", false}, f.m, g, s);
  ASSERT_EQ(backend->seen.size(), 2u);
  EXPECT_NE(backend->seen[1].back().text.find("At the park. Ball or bench?"), std::string::npos);
}

TEST(ExtractState, FallbackCreatesNewStateAfterCap) {
  Fixture f;
  const auto r = run(f, {"x", "x", "x", "x"}, {"Toss or fetch?", {"toss", "fetch"}, f.welcome, "play", false});
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.llm_calls, 4);
  EXPECT_EQ(r.feedback_rounds, 3);
  EXPECT_EQ(r.decision, StateDecision::new_state("Toss or fetch?"));
}

TEST(ExtractState, FallbackJoinsMatchingConfusionState) {
  Fixture f;
  const StateId confused = f.m.ensure_state("Sorry, I didn't get that.");
  f.m.mark_confusion(confused);
  f.m.add_input(confused, "help", Origin::Fallback);
  const auto r = run(f, {"x", "x", "x", "x"}, {"Sorry, say that again?", {"help"}, f.welcome, "jump", true});
  EXPECT_EQ(r.decision, StateDecision::merged_into(confused));
  const auto plain = run(f, {"x", "x", "x", "x"}, {"Sorry, say that again?", {"help"}, f.welcome, "jump", false});
  EXPECT_EQ(plain.decision, StateDecision::new_state("Sorry, say that again?"));
}

TEST(ApplyDecision, MergeAndCreate) {
  Fixture f;
  EXPECT_EQ(apply_decision(f.m, StateDecision::merged_into(f.park), "Park time!"), f.park);
  EXPECT_EQ(f.m.find_state("park TIME!"), f.park);
  const StateId fresh = apply_decision(f.m, StateDecision::new_state("Toss or fetch?"), "Toss or fetch?");
  EXPECT_EQ(f.m.state(fresh).label, "Toss or fetch?");
  EXPECT_EQ(f.m.size(), 4u);
}
