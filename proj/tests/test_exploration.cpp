#include <gtest/gtest.h>

#include "support.hpp"
#include "vui/error.hpp"
#include "vui/exploration.hpp"

using namespace vui;
using namespace vui::explore;
using model::BehaviorModel;
using model::InputEventRecord;
using model::Origin;
using model::StateId;
using model::Validity;
using vui::testing::ScriptedBackend;
using Kind = SelectVerdict::Kind;

namespace {

std::vector<InputEventRecord> sigma_of(std::vector<std::tuple<std::string, std::uint32_t, Validity>> rows) {
  std::vector<InputEventRecord> out;
  for (auto& [p, n, v] : rows) out.push_back({p, n, v, Origin::Gateway});
  return out;
}

// welcome {walk x1 valid, play x0, yes x2 invalid}
struct Fixture {
  BehaviorModel m;
  StateId welcome;

  Fixture() {
    welcome = m.ensure_state("Walk or play?");
    const StateId park = m.ensure_state("Park.");
    for (const char* p : {"walk", "play", "yes"}) m.add_input(welcome, p, Origin::Gateway);
    m.record_interaction(welcome, "walk", "Park.", park);
    m.set_validity(welcome, "walk", Validity::Valid);
    m.record_interaction(welcome, "yes", "Walk or play?", welcome);
    m.record_interaction(welcome, "yes", "Walk or play?", welcome);
    m.set_validity(welcome, "yes", Validity::Invalid);
  }
};

}  // namespace

TEST(ParseThought, SplitsStepsAndChoice) {
  const auto t = parse_thought("Step1: the app asks for an activity.\nStep2: play is related.\n"
                               "Step3: play is fresh.\nOutput: \"play\"");
  EXPECT_EQ(t.step1, "the app asks for an activity.");
  EXPECT_EQ(t.step2, "play is related.");
  EXPECT_EQ(t.step3, "play is fresh.");
  EXPECT_EQ(t.chosen, "play");
}

TEST(ParseThought, LastOutputWinsAndMissingStepsStayEmpty) {
  const auto t = parse_thought("Output: walk\nstep3: changed my mind\nOutput: play");
  EXPECT_EQ(t.chosen, "play");
  EXPECT_EQ(t.step3, "changed my mind");
  EXPECT_TRUE(t.step1.empty());
  EXPECT_TRUE(parse_thought("no idea").chosen.empty());
}

TEST(BetterInputChecker, ChoiceOutsideSigmaIsNoInputError) {
  const auto s = sigma_of({{"walk", 0, Validity::Unknown}});
  EXPECT_EQ(better_input_checker("run", s), (SelectVerdict{Kind::NoInputError, {}}));
  EXPECT_EQ(better_input_checker("", s).kind, Kind::NoInputError);
}

TEST(BetterInputChecker, LessInvokedAlternativeIsSuggested) {
  const auto s = sigma_of({{"walk", 2, Validity::Valid}, {"play", 1, Validity::Unknown}, {"sit", 0, Validity::Valid}});
  EXPECT_EQ(better_input_checker("walk", s), (SelectVerdict{Kind::BetterInputSuggestion, "sit"}));
}

TEST(BetterInputChecker, InvalidChoiceLosesToAnyUsableInput) {
  const auto s = sigma_of({{"yes", 0, Validity::Invalid}, {"walk", 3, Validity::Valid}});
  EXPECT_EQ(better_input_checker("yes", s), (SelectVerdict{Kind::BetterInputSuggestion, "walk"}));
}

TEST(BetterInputChecker, InvalidAlternativesAreNeverSuggested) {
  const auto s = sigma_of({{"walk", 2, Validity::Valid}, {"yes", 0, Validity::Invalid}});
  EXPECT_EQ(better_input_checker("Walk", s), SelectVerdict{});
}

TEST(BetterInputChecker, TiesAccept) {
  const auto s = sigma_of({{"walk", 1, Validity::Valid}, {"play", 1, Validity::Unknown}});
  EXPECT_EQ(better_input_checker("play", s), SelectVerdict{});
}

TEST(FallbackSelect, LeastInvokedUsableEarliestOnTies) {
  EXPECT_EQ(fallback_select(sigma_of({{"a", 1, Validity::Valid}, {"b", 0, Validity::Invalid}, {"c", 1, Validity::Unknown}})),
            "a");
  EXPECT_EQ(fallback_select(sigma_of({{"a", 3, Validity::Invalid}, {"b", 1, Validity::Invalid}})), "b");
  EXPECT_THROW(fallback_select({}), InvalidArgument);
}

TEST(SelectInput, AcceptsFirstGoodChoice) {
  Fixture f;
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"Step1: x\nOutput: PLAY"});
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Exploration);
  const auto r = select_input(f.welcome, f.m, g, s);
  EXPECT_EQ(r.phrase, "play");
  EXPECT_EQ(r.trace.step1, "x");
  EXPECT_EQ(r.verdicts, std::vector<SelectVerdict>{SelectVerdict{}});
}

TEST(SelectInput, FeedbackThenAccept) {
  Fixture f;
  auto backend = std::make_shared<ScriptedBackend>(
      std::vector<std::string>{"Output: jump", "Output: yes", "Output: play"});
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Exploration);
  const auto r = select_input(f.welcome, f.m, g, s);
  ASSERT_EQ(r.verdicts.size(), 3u);
  EXPECT_EQ(r.verdicts[0].kind, Kind::NoInputError);
  EXPECT_EQ(r.verdicts[1], (SelectVerdict{Kind::BetterInputSuggestion, "play"}));
  EXPECT_EQ(r.rejected.size(), 2u);
  EXPECT_EQ(r.feedback_rounds, 2);
  EXPECT_EQ(r.phrase, "play");
  EXPECT_NE(backend->seen[1].back().text.find("jump"), std::string::npos);
  EXPECT_NE(backend->seen[2].back().text.find("play"), std::string::npos);
}

TEST(SelectInput, FallbackAfterCap) {
  Fixture f;
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{}, [](const llm::Request&) {
    return std::string("Output: jump");
  });
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Exploration);
  const auto r = select_input(f.welcome, f.m, g, s);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.llm_calls, 4);
  EXPECT_EQ(r.phrase, "play");
  EXPECT_TRUE(r.trace.chosen.empty());
}

TEST(SelectInput, EmptySigmaThrows) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  auto g = vui::testing::gateway_with(std::make_shared<ScriptedBackend>());
  auto s = g.open_session(llm::Phase::Exploration);
  EXPECT_THROW(select_input(a, m, g, s), InvalidArgument);
}
