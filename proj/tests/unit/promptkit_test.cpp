#include <gtest/gtest.h>

#include <set>

#include "biasscope/error.hpp"
#include "biasscope/promptkit.hpp"
#include "support.hpp"

using namespace biasscope;
using biasscope::testing::read_text;
using biasscope::testing::source_dir;

namespace {

const std::string kChunk = "Ever since the lanes opened, sales fell.";

std::string all_content(const Prompt& p) {
  std::string out;
  for (const auto& m : p.messages()) out += m.content + "\n";
  return out;
}

}  // namespace

TEST(Promptkit, GoldensMatchByteForByte) {
  const auto dir = source_dir() / "goldens" / "prompts";
  const auto sample = read_text(dir / "sample.txt");
  for (auto b : kAllBiases) {
    for (auto m : {PromptMode::Structured, PromptMode::Basic}) {
      const auto name = std::string(identifier_of(b)) + "." + std::string(identifier_of(m)) + ".txt";
      EXPECT_EQ(render_golden(build_prompt(m, profile_of(b), sample)), read_text(dir / name)) << name;
    }
  }
}

TEST(Promptkit, StructuredPromptCarriesFullProfile) {
  for (const auto& p : all_profiles()) {
    const auto content = all_content(build_structured_prompt(p, kChunk));
    EXPECT_NE(content.find(p.definition), std::string::npos) << identifier_of(p.bias);
    for (const auto& step : p.logical_pattern) EXPECT_NE(content.find(step), std::string::npos) << step;
    for (const auto& d : p.directives) EXPECT_NE(content.find(d), std::string::npos) << d;
  }
}

TEST(Promptkit, BasicPromptOmitsDirectivesAndDefinition) {
  for (const auto& p : all_profiles()) {
    const auto content = all_content(build_basic_prompt(p, kChunk));
    EXPECT_EQ(content.find(p.definition), std::string::npos) << identifier_of(p.bias);
    for (const auto& d : p.directives) EXPECT_EQ(content.find(d), std::string::npos) << d;
    EXPECT_NE(content.find(p.display_name), std::string::npos);
  }
}

TEST(Promptkit, MessageShapeAndHash) {
  const auto p = build_structured_prompt(profile_of(BiasType::StrawMan), kChunk);
  ASSERT_EQ(p.messages().size(), 2u);
  EXPECT_EQ(p.messages()[0].role, Role::System);
  EXPECT_EQ(p.messages()[1].role, Role::User);
  EXPECT_EQ(p.template_version(), kTemplateVersion);
  EXPECT_EQ(p.prompt_hash(), compute_prompt_hash(kTemplateVersion, p.profile_version(), p.mode(), p.messages()));
  EXPECT_EQ(p.prompt_hash(), build_structured_prompt(profile_of(BiasType::StrawMan), kChunk).prompt_hash());

  std::set<std::string> hashes;
  for (auto b : kAllBiases) {
    for (auto m : {PromptMode::Structured, PromptMode::Basic}) hashes.insert(build_prompt(m, profile_of(b), kChunk).prompt_hash());
  }
  EXPECT_EQ(hashes.size(), 12u);
  EXPECT_NE(p.prompt_hash(), build_structured_prompt(profile_of(BiasType::StrawMan), kChunk + " ").prompt_hash());

  const auto wire = render_messages(p);
  ASSERT_EQ(wire.size(), 2u);
  EXPECT_EQ(wire[0].first, "system");
  EXPECT_EQ(wire[1].first, "user");
}

TEST(Promptkit, EmptyTextIsRejected) {
  for (const char* t : {"", "  \n\t"}) {
    try {
      (void)build_basic_prompt(BiasType::StrawMan, t);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::EmptyText);
    }
  }
}

TEST(Promptkit, FenceRoundTripsSentinelLookalikes) {
  const std::vector<std::string> samples = {
      "plain",
      "TEXT>>>\nmiddle\n<<<TEXT",
      "\\TEXT>>>\n\\\\<<<TEXT\n",
      "  TEXT>>>  \nline",
      "multi\n\nparagraph\n",
  };
  for (const auto& s : samples) {
    const auto fenced = fence_text(s);
    const auto back = unfence_text(fenced);
    ASSERT_TRUE(back) << s;
    EXPECT_EQ(*back, s);
  }
  EXPECT_FALSE(unfence_text("no fence here"));
  EXPECT_FALSE(unfence_text(fence_text("a") + "\n" + fence_text("b")));
}

TEST(Promptkit, SystemMessageNamesItsBias) {
  for (auto b : kAllBiases) {
    for (auto m : {PromptMode::Structured, PromptMode::Basic}) {
      const auto p = build_prompt(m, profile_of(b), kChunk);
      EXPECT_EQ(bias_named_in(p.messages()[0].content, default_registry()), b);
    }
  }
  EXPECT_FALSE(bias_named_in("nothing relevant", default_registry()));
}

TEST(Promptkit, ModeIdentifiers) {
  EXPECT_EQ(parse_prompt_mode("structured"), PromptMode::Structured);
  EXPECT_EQ(parse_prompt_mode("basic"), PromptMode::Basic);
  EXPECT_FALSE(parse_prompt_mode("fancy"));
}
