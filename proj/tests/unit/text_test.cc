#include "echoreason/text.h"

#include <gtest/gtest.h>

namespace echoreason {
namespace {

// Reference FNV-1a 64 written out from the published constants.
std::uint64_t OracleFnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

TEST(TextTest, FnvKnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(Fnv1a64Hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(Fnv1a64Hex(""), "cbf29ce484222325");
}

TEST(TextTest, FnvMatchesOracle) {
  for (std::string s : {"septal", "PLAX", "apical four chamber", "\xff\x00z"}) {
    EXPECT_EQ(Fnv1a64(s), OracleFnv1a(s)) << s;
  }
}

TEST(TextTest, TokenizeKeepsLowercaseAlnumRunsOfThreeOrMore) {
  EXPECT_EQ(Tokenize("Is the LVOT gradient >= 30 mmHg in A5C?"),
            (std::vector<std::string>{"the", "lvot", "gradient", "mmhg", "a5c"}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_TRUE(Tokenize("a bc 12 ..").empty());
}

TEST(TextTest, TokenizeSplitsOnNonAscii) {
  EXPECT_EQ(Tokenize("caf\xc3\xa9-septal"), (std::vector<std::string>{"caf", "septal"}));
}

TEST(TextTest, WordSetKeepsShortWords) {
  const auto words = WordSet("No, it is absent");
  EXPECT_TRUE(words.count("no"));
  EXPECT_TRUE(words.count("it"));
  EXPECT_TRUE(words.count("absent"));
  EXPECT_FALSE(TokenSet("No, it is absent").count("no"));
}

TEST(TextTest, TrimAndLower) {
  EXPECT_EQ(TrimWhitespace("  \t x y \n"), "x y");
  EXPECT_EQ(TrimWhitespace("   "), "");
  EXPECT_EQ(ToLowerAscii("PLAX View"), "plax view");
}

}  // namespace
}  // namespace echoreason
