#include <gtest/gtest.h>

#include "biasscope/text.hpp"

namespace text = biasscope::text;

TEST(Text, Utf8Validation) {
  EXPECT_TRUE(text::is_valid_utf8("plain"));
  EXPECT_TRUE(text::is_valid_utf8("caf\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80"));
  EXPECT_FALSE(text::is_valid_utf8("\xc3"));              // truncated
  EXPECT_FALSE(text::is_valid_utf8("\xc0\xaf"));          // overlong
  EXPECT_FALSE(text::is_valid_utf8("\xed\xa0\x80"));      // surrogate
  EXPECT_FALSE(text::is_valid_utf8("\xf4\x90\x80\x80"));  // above U+10FFFF
  EXPECT_FALSE(text::is_valid_utf8("\xff"));
}

TEST(Text, DecodeEncodeRoundTrip) {
  const std::string s = "a\xc3\xa9\xe2\x82\xac\xf0\x9f\x98\x80";
  const auto cps = text::decode_utf8(s);
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[1], U'é');
  EXPECT_EQ(cps[3], U'\U0001F600');
  EXPECT_EQ(text::encode_utf8(cps), s);
}

TEST(Text, NormalizeNewlines) {
  EXPECT_EQ(text::normalize_newlines("a\r\nb\rc\n"), "a\nb\nc\n");
  EXPECT_EQ(text::normalize_newlines("\r\r\n"), "\n\n");
}

TEST(Text, TrimAndCase) {
  EXPECT_EQ(text::trim("  x y \t\n"), "x y");
  EXPECT_EQ(text::trim("   "), "");
  EXPECT_TRUE(text::iequals("Verdict", "VERDICT"));
  EXPECT_FALSE(text::iequals("Verdict", "Verdic"));
  EXPECT_TRUE(text::istarts_with("RATIONALE: x", "rationale:"));
  EXPECT_EQ(text::to_lower_ascii("AbC\xc3\x89"), "abc\xc3\x89");
}

TEST(Text, SplitAndJoin) {
  EXPECT_EQ(text::split("a,b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(text::join({"a", "b", "c"}, ", "), "a, b, c");
  EXPECT_EQ(text::join({}, ", "), "");
  const auto lines = text::split_lines("x\ny\n");
  ASSERT_GE(lines.size(), 2u);
  EXPECT_EQ(lines[0], "x");
  EXPECT_EQ(lines[1], "y");
}

TEST(Text, WordTokensKeepInnerApostrophes) {
  EXPECT_EQ(text::word_tokens("So you're saying: NO-ONE cares!"),
            (std::vector<std::string>{"so", "you're", "saying", "no", "one", "cares"}));
  EXPECT_EQ(text::word_tokens("'quoted'"), (std::vector<std::string>{"quoted"}));
  EXPECT_TRUE(text::word_tokens("  ...  ").empty());
}

TEST(Text, Rfc3339RoundTrip) {
  using namespace std::chrono;
  const system_clock::time_point tp = sys_days{year{2024} / 5 / 1} + hours{12} + minutes{3} + seconds{4} + milliseconds{56};
  const auto s = text::format_rfc3339(tp);
  EXPECT_EQ(s, "2024-05-01T12:03:04.056Z");
  const auto back = text::parse_rfc3339(s);
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, tp);
  EXPECT_FALSE(text::parse_rfc3339("2024-05-01 12:03:04"));
  EXPECT_FALSE(text::parse_rfc3339("garbage"));
}
