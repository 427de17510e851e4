#include <gtest/gtest.h>

#include "vui/rng.hpp"
#include "vui/text.hpp"

using namespace vui;

TEST(Text, NormalizeFoldsCaseAndWhitespace) {
  EXPECT_EQ(text::normalize("  Hello\t  World \n"), "hello world");
  EXPECT_EQ(text::normalize(""), "");
}

TEST(Text, TrimKeepsInnerSpaces) { EXPECT_EQ(text::trim("  a b  "), "a b"); }

TEST(Text, WordHelpers) {
  EXPECT_EQ(text::word_count("one two  three"), 3u);
  EXPECT_TRUE(text::starts_with_word("Say hello", "say"));
  EXPECT_FALSE(text::starts_with_word("Sayonara", "say"));
  EXPECT_TRUE(text::contains_ci("Main MENU please", "main menu"));
}

TEST(Text, FormatListQuotesItems) {
  EXPECT_EQ(text::format_list({"a", "b c"}), "[\"a\", \"b c\"]");
  EXPECT_EQ(text::format_list({}), "[]");
}

TEST(Rng, DerivedSeedsDifferByTag) {
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
  EXPECT_EQ(derive_seed(7, "x"), derive_seed(7, "x"));
}

TEST(Rng, BoundedDrawsStayInRange) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const int v = rng.between(2, 4);
    EXPECT_GE(v, 2);
    EXPECT_LE(v, 4);
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
