#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"

#include "vui/error.hpp"
#include "vui/input_generation.hpp"

using namespace vui;
using namespace vui::inputs;

namespace fs = std::filesystem;

namespace {

struct Golden {
  std::string type;
  std::string sentence;
  std::vector<std::string> inputs;
};

std::vector<Golden> load_goldens() {
  std::ifstream in(fs::path(VUI_SOURCE_DIR) / "tests" / "data" / "question_goldens.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<Golden> out;
  for (const auto& e : j) {
    out.push_back({e.at("type").get<std::string>(), e.at("sentence").get<std::string>(),
                   e.at("inputs").get<std::vector<std::string>>()});
  }
  return out;
}

}  // namespace

TEST(QuestionGoldens, FivePerTypeWithAllMixedPatterns) {
  std::map<std::string, int> per_type;
  for (const auto& g : load_goldens()) {
    const std::string bucket = g.type.find('+') != std::string::npos ? "mixed" : g.type;
    ++per_type[bucket];
    if (bucket == "mixed") ++per_type[g.type];
  }
  for (const char* t : {"yes-no", "selection", "instruction", "wh", "mixed"}) EXPECT_EQ(per_type[t], 5) << t;
  for (const char* t : {"instruction+selection", "wh+selection", "yes-no+selection"}) EXPECT_GE(per_type[t], 1) << t;
}

TEST(QuestionGoldens, RuleBasedRepliesMatch) {
  for (const auto& g : load_goldens()) {
    EXPECT_EQ(rule_based_inputs(g.sentence), g.inputs) << g.sentence;
    EXPECT_EQ(to_string(classify_question(g.sentence)), g.type) << g.sentence;
  }
}

TEST(QuestionParser, StatementsFallBackToSalientPhrases) {
  const auto out = rule_based_inputs("Here is your daily horoscope.");
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(classify_question("Here is your daily horoscope."), QuestionType::Other);
  for (const auto& p : out) EXPECT_LE(std::count(p.begin(), p.end(), ' ') + 1, 5);
}

TEST(QuestionParser, NeverEmpty) {
  EXPECT_EQ(rule_based_inputs("..."), std::vector<std::string>{"help"});
}

TEST(QuestionParser, SentencesAreParsedIndependently) {
  EXPECT_EQ(rule_based_inputs("Welcome back. Say start to begin. Which topic, music or news?"),
            (std::vector<std::string>{"start", "music", "news"}));
}

TEST(QuestionParser, MixedTypesAreFlagged) {
  EXPECT_TRUE(is_mixed(QuestionType::YesNoSelection));
  EXPECT_FALSE(is_mixed(QuestionType::Selection));
}

TEST(NormalizeInputs, DropsOverlongAndDuplicates) {
  EXPECT_EQ(normalize_inputs({" Yes.", "yes", "", "one two three four five six", "\"Main Menu\""}, 5),
            (std::vector<std::string>{"yes", "main menu"}));
}

TEST(Confusion, PhrasesMatchCaseInsensitively) {
  EXPECT_TRUE(is_confusion_response("SORRY, I didn't get that."));
  EXPECT_TRUE(is_confusion_response("Hmm, I'm not sure what you mean."));
  EXPECT_FALSE(is_confusion_response("Walk or play?"));
}

TEST(ParserConfig, FilesOverrideLists) {
  const fs::path dir = fs::temp_directory_path() / "vui_parser_cfg";
  fs::create_directories(dir);
  std::ofstream(dir / "lex.txt") << "# comment\nplanet: mars\n\n";
  std::ofstream(dir / "conf.txt") << "come again\n";
  const auto c = ParserConfig::load(dir / "lex.txt", dir / "conf.txt");
  EXPECT_EQ(rule_based_inputs("What planet do you like?", c), std::vector<std::string>{"mars"});
  EXPECT_TRUE(is_confusion_response("Come again?", c));
  EXPECT_FALSE(is_confusion_response("Sorry, what?", c));
  std::ofstream(dir / "bad.txt") << "no colon here\n";
  EXPECT_THROW(ParserConfig::load(dir / "bad.txt", ""), InvalidArgument);
}

TEST(ParserConfig, ShippedFilesMatchDefaults) {
  const fs::path cfg = fs::path(VUI_SOURCE_DIR) / "config";
  const auto loaded = ParserConfig::load(cfg / "lexicon.txt", cfg / "confusion.txt");
  EXPECT_EQ(loaded.noun_lexicon, ParserConfig::defaults().noun_lexicon);
  EXPECT_EQ(loaded.confusion_phrases, ParserConfig::defaults().confusion_phrases);
}
