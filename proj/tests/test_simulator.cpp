#include <gtest/gtest.h>

#include <deque>
#include <filesystem>
#include <set>

#include "json.hpp"

#include "vui/error.hpp"
#include "vui/simulator.hpp"

using namespace vui;
using namespace vui::sim;
using nlohmann::json;

namespace {

json pet_json() {
  return json::parse(to_json(load_spec_file(std::filesystem::path(VUI_SOURCE_DIR) / "fixtures" / "pet_buddy.json")));
}

std::string schema_path_of(const json& j) {
  try {
    load_spec(j.dump());
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST(LoadSpec, FixtureLoads) {
  const auto spec = load_spec(pet_json().dump());
  EXPECT_EQ(spec.name, "Pet Buddy");
  EXPECT_EQ(spec.states.size(), 5u);
  EXPECT_TRUE(spec.state("bye").is_final);
}

TEST(LoadSpec, ErrorsCarryJsonPaths) {
  auto j = pet_json();
  j["states"][2]["transitions"][0]["to"] = "nowhere";
  EXPECT_EQ(schema_path_of(j), "$.states[2].transitions[0].to");

  j = pet_json();
  j["states"][1].erase("utterances");
  EXPECT_EQ(schema_path_of(j), "$.states[1].utterances");

  j = pet_json();
  j["initial"] = "ghost";
  EXPECT_EQ(schema_path_of(j), "$.initial");

  j = pet_json();
  j["states"][3]["utterances"][0] = "Great, a walk! Park or beach?";
  EXPECT_EQ(schema_path_of(j), "$.states[3].utterances[0]");

  j = pet_json();
  j["states"][0]["fallback"]["utterances"][0] = "Walk or play?";
  EXPECT_EQ(schema_path_of(j), "$.states[0].fallback.utterances[0]");

  j = pet_json();
  j["states"][4]["is_final"] = false;
  EXPECT_EQ(schema_path_of(j), "$.states[4].fallback");

  EXPECT_EQ(schema_path_of(json::array()), "$");
  EXPECT_THROW(load_spec("{not json"), SchemaError);
}

TEST(SimSession, TransitionsFallbackAndEnd) {
  auto spec = std::make_shared<const SkillSpec>(load_spec(pet_json().dump()));
  auto [s, first] = Session::launch(spec, 7);
  EXPECT_EQ(first.eval_meta.truth_state, "welcome");
  const auto miss = s.respond("dance");
  EXPECT_TRUE(miss.eval_meta.was_fallback);
  EXPECT_EQ(miss.text, "Sorry, I didn't get that. Do you want to walk or play?");
  EXPECT_EQ(s.respond("  Walk. ").eval_meta.truth_state, "walk");
  const auto end = s.respond("beach");
  EXPECT_TRUE(end.ended);
  EXPECT_EQ(s.rounds(), 3);
  EXPECT_THROW(s.respond("hi"), SessionEnded);
}

TEST(SimSession, VariantsDependOnSeedOnly) {
  auto spec = std::make_shared<const SkillSpec>(load_spec(pet_json().dump()));
  std::set<std::string> openings;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    auto a = Session::launch(spec, seed).second.text;
    EXPECT_EQ(a, Session::launch(spec, seed).second.text);
    openings.insert(a);
  }
  EXPECT_EQ(openings.size(), 2u);
}

TEST(GroundTruth, OneStatePerSpecStatePlusStart) {
  const auto spec = load_spec(pet_json().dump());
  const auto m = ground_truth(spec);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_TRUE(m.validate().empty());
  const auto welcome = m.find_state("Hi, this is Pet Buddy! Would you like to walk or play?");
  ASSERT_TRUE(welcome);
  EXPECT_EQ(m.find_state("Sorry, I didn't get that. Do you want to walk or play?"), welcome);
  EXPECT_EQ(m.sigma(*welcome).size(), 4u);
  EXPECT_EQ(m.finals().size(), 1u);
}

TEST(TruthIndexTest, MapsEveryText) {
  const auto spec = load_spec(pet_json().dump());
  TruthIndex idx(spec);
  EXPECT_EQ(idx.truth_of("time for a walk.  park or beach?"), "walk");
  EXPECT_EQ(idx.truth_of("Hmm, I'm not sure what you mean. Say fetch or tug."), "play");
  EXPECT_FALSE(idx.truth_of("unrelated"));
}

TEST(GenCorpus, DeterministicAndWithinBounds) {
  CorpusOptions o;
  const auto a = gen_corpus(o);
  const auto b = gen_corpus(o);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(to_json(a[i]), to_json(b[i]));
    EXPECT_NO_THROW(load_spec(to_json(a[i])));
    EXPECT_GE(a[i].states.size(), 5u);
    EXPECT_LE(a[i].states.size(), 15u);
    for (const auto& s : a[i].states) {
      EXPECT_GE(s.utterances.size(), 2u);
      EXPECT_LE(s.utterances.size(), 4u);
      if (!s.is_final) {
        EXPECT_GE(s.transitions.size(), 2u);
        EXPECT_LE(s.transitions.size(), 4u);
      }
    }
  }
  o.seed = 43;
  EXPECT_NE(to_json(gen_corpus(o)[0]), to_json(a[0]));
}

// Every state is reachable by replying with transition patterns.
TEST(GenCorpus, EveryStateReachableThroughReplies) {
  for (const auto& spec : gen_corpus({})) {
    std::set<std::string> seen{spec.initial};
    std::deque<std::string> q{spec.initial};
    while (!q.empty()) {
      const auto& s = spec.state(q.front());
      q.pop_front();
      for (const auto& t : s.transitions) {
        if (seen.insert(t.to).second) q.push_back(t.to);
      }
    }
    EXPECT_EQ(seen.size(), spec.states.size()) << spec.name;
  }
}
