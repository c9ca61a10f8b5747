#include <gtest/gtest.h>

#include <set>

#include "biasscope/error.hpp"
#include "biasscope/taxonomy.hpp"
#include "support.hpp"

using namespace biasscope;
using biasscope::testing::TempDir;
using biasscope::testing::write_text;

TEST(Taxonomy, SixBiasesWithStableIdentifiers) {
  ASSERT_EQ(kAllBiases.size(), 6u);
  std::set<std::string_view> ids;
  for (auto b : kAllBiases) {
    ids.insert(identifier_of(b));
    EXPECT_EQ(parse_bias_type(identifier_of(b)), b);
  }
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_EQ(identifier_of(BiasType::StrawMan), "straw-man");
  EXPECT_EQ(identifier_of(BiasType::HiddenAssumption), "hidden-assumption");
}

TEST(Taxonomy, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_bias_type("Straw-Man"), BiasType::StrawMan);
  EXPECT_EQ(parse_bias_type("CONFIRMATION-BIAS"), BiasType::ConfirmationBias);
}

TEST(Taxonomy, UnknownBiasListsValidIdentifiers) {
  try {
    (void)parse_bias_type("anchoring");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownBias);
    const std::string msg = e.what();
    for (auto b : kAllBiases) EXPECT_NE(msg.find(identifier_of(b)), std::string::npos) << msg;
  }
}

TEST(Taxonomy, ShippedProfilesSatisfyInvariants) {
  const auto& registry = default_registry();
  std::set<std::string> names;
  for (auto b : kAllBiases) {
    const auto& p = registry.profile_of(b);
    EXPECT_EQ(p.bias, b);
    EXPECT_FALSE(p.definition.empty());
    EXPECT_GE(p.logical_pattern.size(), 2u);
    EXPECT_GE(p.directives.size(), 3u);
    EXPECT_EQ(p.version, "1.0.0");
    names.insert(p.display_name);
  }
  EXPECT_EQ(names.size(), 6u);
}

TEST(Taxonomy, DefinitionsKeepCanonicalWording) {
  EXPECT_EQ(profile_of(BiasType::StrawMan).definition,
            "Straw man refers to misrepresenting or oversimplifying an opponent's argument to make it easier to "
            "refute. This can lead to a misunderstanding of the actual position and a failure to address the real "
            "issues.");
  EXPECT_EQ(profile_of(BiasType::ConfirmationBias).definition,
            "Confirmation bias leads to selectively searching for, interpreting, and recalling information that "
            "confirms pre-existing beliefs, while ignoring or dismissing contradictory evidence.");
  EXPECT_EQ(profile_of(BiasType::CircularReasoning).definition.rfind("Circular Reasoning refers to using a conclusion", 0),
            0u);
}

namespace {

std::string valid_profile(BiasType bias, const std::string& name) {
  return "bias = \"" + std::string(identifier_of(bias)) + "\"\n"
         "display_name = \"" + name + "\"\n"
         "definition = \"Some definition.\"\n"
         "logical_pattern = [\"step one\", \"step two\"]\n"
         "directives = [\"d1\", \"d2\", \"d3\"]\n"
         "version = \"1.0.0\"\n";
}

void write_all(const std::filesystem::path& dir) {
  int i = 0;
  for (auto b : kAllBiases) write_text(dir / (std::string(identifier_of(b)) + ".toml"), valid_profile(b, "Bias " + std::to_string(i++)));
}

Errc load_error(const std::filesystem::path& dir, std::string* message = nullptr) {
  try {
    (void)ProfileRegistry::load(dir);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  return Errc::Io;  // sentinel: no error
}

}  // namespace

TEST(Taxonomy, LoadsCustomDirectory) {
  TempDir dir;
  write_all(dir.path());
  const auto registry = ProfileRegistry::load(dir.path());
  EXPECT_EQ(registry.profile_of(BiasType::StrawMan).display_name, "Bias 0");
}

TEST(Taxonomy, MalformedProfilesNameTheFile) {
  struct Case {
    const char* name;
    std::string content;
  };
  const std::vector<Case> cases = {
      {"one step", "bias = \"mirror-imaging\"\ndisplay_name = \"X\"\ndefinition = \"d\"\nlogical_pattern = [\"one\"]\n"
                   "directives = [\"a\", \"b\", \"c\"]\nversion = \"1.0.0\"\n"},
      {"two directives", "bias = \"mirror-imaging\"\ndisplay_name = \"X\"\ndefinition = \"d\"\nlogical_pattern = [\"a\", \"b\"]\n"
                         "directives = [\"a\", \"b\"]\nversion = \"1.0.0\"\n"},
      {"empty definition", "bias = \"mirror-imaging\"\ndisplay_name = \"X\"\ndefinition = \"\"\nlogical_pattern = [\"a\", \"b\"]\n"
                           "directives = [\"a\", \"b\", \"c\"]\nversion = \"1.0.0\"\n"},
      {"bad version", "bias = \"mirror-imaging\"\ndisplay_name = \"X\"\ndefinition = \"d\"\nlogical_pattern = [\"a\", \"b\"]\n"
                      "directives = [\"a\", \"b\", \"c\"]\nversion = \"v1\"\n"},
      {"unknown key", valid_profile(BiasType::MirrorImaging, "X") + "extra = 1\n"},
      {"wrong bias", valid_profile(BiasType::StrawMan, "X")},
      {"missing key", "display_name = \"X\"\n"},
  };
  for (const auto& c : cases) {
    TempDir dir;
    write_all(dir.path());
    write_text(dir / "mirror-imaging.toml", c.content);
    std::string msg;
    EXPECT_EQ(load_error(dir.path(), &msg), Errc::MalformedProfile) << c.name;
    EXPECT_NE(msg.find("mirror-imaging.toml"), std::string::npos) << c.name << ": " << msg;
  }
}

TEST(Taxonomy, MissingFileAndDuplicateNamesAreRejected) {
  {
    TempDir dir;
    write_all(dir.path());
    std::filesystem::remove(dir / "straw-man.toml");
    EXPECT_EQ(load_error(dir.path()), Errc::MalformedProfile);
  }
  {
    TempDir dir;
    write_all(dir.path());
    write_text(dir / "straw-man.toml", valid_profile(BiasType::StrawMan, "Bias 1"));
    EXPECT_EQ(load_error(dir.path()), Errc::MalformedProfile);
  }
}
