#include <gtest/gtest.h>

#include "support.hpp"
#include "vui/error.hpp"
#include "vui/input_generation.hpp"

using namespace vui;
using namespace vui::inputs;
using model::BehaviorModel;
using model::Origin;
using model::StateId;
using vui::testing::ScriptedBackend;

namespace {

GenerationResult generate(std::vector<std::string> replies, const std::optional<std::string>& invalid = std::nullopt,
                          bool warm = false) {
  auto backend = std::make_shared<ScriptedBackend>(std::move(replies));
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Generation);
  if (warm) s.mark_long_prompt_used();
  return generate_inputs("Do you want to walk or play?", g, s, ParserConfig::defaults(), invalid);
}

}  // namespace

TEST(InputChecker, NonEmptyListIsOk) {
  const auto r = generate({"Output: [\"walk\", \"play\"]"});
  EXPECT_EQ(r.inputs, (std::vector<std::string>{"walk", "play"}));
  EXPECT_EQ(r.origin, Origin::Gateway);
  EXPECT_EQ(r.verdicts, std::vector<InputCheck>{InputCheck::ok()});
  EXPECT_FALSE(r.used_fallback);
}

TEST(InputChecker, EmptyListGetsEmptyErrorFeedback) {
  const auto r = generate({"Output: []", "Output: [\"walk\"]"});
  ASSERT_EQ(r.verdicts.size(), 2u);
  EXPECT_EQ(r.verdicts[0], InputCheck::empty_error());
  EXPECT_EQ(r.feedback_rounds, 1);
  EXPECT_EQ(r.inputs, std::vector<std::string>{"walk"});
}

TEST(InputChecker, FallsBackAfterFeedbackCap) {
  const auto r = generate({"[]", "[]", "[]", "[]", "[\"never used\"]"});
  EXPECT_EQ(r.llm_calls, 4);
  EXPECT_EQ(r.feedback_rounds, 3);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.origin, Origin::Fallback);
  EXPECT_EQ(r.inputs, rule_based_inputs("Do you want to walk or play?"));
}

TEST(InputChecker, OverlongRepliesCountAsEmpty) {
  const auto r = generate({"[\"I would really like to go for a walk\"]", "[\"walk\"]"});
  EXPECT_EQ(r.verdicts[0], InputCheck::empty_error());
}

TEST(InputChecker, FirstRequestUsesLongPromptThenShort) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"[\"a\"]", "[\"b\"]"});
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Generation);
  generate_inputs("Walk or play?", g, s);
  generate_inputs("Park or beach?", g, s);
  EXPECT_NE(backend->seen[0][0].text.find("Voice applications only understand"), std::string::npos);
  EXPECT_EQ(backend->seen[1].back().text.rfind("Input: \"Park or beach?\"", 0), 0u);
}

TEST(InputChecker, InvalidInputOpensWithSuggestionFeedback) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"[\"walk\"]"});
  auto g = vui::testing::gateway_with(backend);
  auto s = g.open_session(llm::Phase::Generation);
  s.mark_long_prompt_used();
  generate_inputs("Do you want to walk or play?", g, s, ParserConfig::defaults(), std::string("yes"));
  EXPECT_EQ(backend->seen[0].back().text.rfind("yes is not a valid response for the sentence", 0), 0u);
}

TEST(InputChecker, UnavailableBackendFallsBack) {
  class Down : public llm::Backend {
    std::string reply(const llm::Request&) override { throw BackendUnavailable("down"); }
  };
  auto g = vui::testing::gateway_with(std::make_shared<Down>());
  auto s = g.open_session(llm::Phase::Generation);
  const auto r = generate_inputs("Walk or play?", g, s);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.llm_calls, 0);
}

TEST(InputChecker, OverflowRestartsWindowOnce) {
  auto config = vui::testing::quick_config();
  config.context_limit_chars = 400;
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"[\"walk\"]"});
  auto g = vui::testing::gateway_with(backend, config);
  auto s = g.open_session(llm::Phase::Generation);
  const auto r = generate_inputs("Walk or play?", g, s);
  EXPECT_EQ(r.inputs, std::vector<std::string>{"walk"});
  EXPECT_TRUE(s.long_prompt_used());
  EXPECT_EQ(backend->seen.size(), 1u);
}

TEST(InputOutcome, SameStateIsInvalid) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Walk or play?");
  m.add_input(a, "yes", Origin::Gateway);
  m.record_interaction(a, "yes", "Walk or play?", a);
  FeedbackQueue q;
  EXPECT_EQ(check_input_outcome(m, a, "yes", a, "Walk or play?", &q), InputCheck::invalid("yes"));
  EXPECT_EQ(m.find_input(a, "yes")->validity, model::Validity::Invalid);
  EXPECT_EQ(q.pop(a), "yes");
  EXPECT_FALSE(q.has(a));
}

TEST(InputOutcome, ConfusionOutputIsInvalid) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Walk or play?");
  const StateId c = m.ensure_state("Sorry, I didn't get that. Walk or play?");
  m.add_input(a, "blah", Origin::Gateway);
  m.record_interaction(a, "blah", "Sorry, I didn't get that. Walk or play?", c);
  EXPECT_EQ(check_input_outcome(m, a, "blah", c, "Sorry, I didn't get that. Walk or play?"), InputCheck::invalid("blah"));
  EXPECT_EQ(m.find_input(a, "blah")->validity, model::Validity::Invalid);
}

TEST(InputOutcome, NewStateIsOk) {
  BehaviorModel m;
  const StateId a = m.ensure_state("Walk or play?");
  const StateId b = m.ensure_state("Park or beach?");
  m.add_input(a, "walk", Origin::Gateway);
  m.record_interaction(a, "walk", "Park or beach?", b);
  FeedbackQueue q;
  EXPECT_EQ(check_input_outcome(m, a, "walk", b, "Park or beach?", &q), InputCheck::ok());
  EXPECT_EQ(m.find_input(a, "walk")->validity, model::Validity::Valid);
  EXPECT_FALSE(q.has(a));
}

TEST(InputOutcome, UnknownInputThrows) {
  BehaviorModel m;
  const StateId a = m.ensure_state("A");
  EXPECT_THROW(check_input_outcome(m, a, "nope", a, "A"), UnknownInput);
}
