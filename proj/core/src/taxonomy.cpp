#include "biasscope/taxonomy.hpp"

#include <cstdlib>
#include <set>

#include "biasscope/error.hpp"
#include "biasscope/kvfile.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

std::string_view identifier_of(BiasType bias) noexcept {
  switch (bias) {
    case BiasType::StrawMan: return "straw-man";
    case BiasType::FalseCausality: return "false-causality";
    case BiasType::CircularReasoning: return "circular-reasoning";
    case BiasType::MirrorImaging: return "mirror-imaging";
    case BiasType::ConfirmationBias: return "confirmation-bias";
    case BiasType::HiddenAssumption: return "hidden-assumption";
  }
  return "unknown";
}

std::size_t bias_index(BiasType bias) noexcept { return static_cast<std::size_t>(bias); }

BiasType parse_bias_type(std::string_view identifier) {
  const auto trimmed = text::trim(identifier);
  for (BiasType b : kAllBiases) {
    if (text::iequals(trimmed, identifier_of(b))) return b;
  }
  std::string valid;
  for (BiasType b : kAllBiases) {
    if (!valid.empty()) valid += ", ";
    valid += identifier_of(b);
  }
  throw Error(Errc::UnknownBias, "'" + std::string(identifier) + "' is not a known bias (valid: " + valid + ")");
}

namespace {

BiasProfile read_profile(const std::filesystem::path& path, BiasType expected) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(Errc::MalformedProfile, path.string() + ": " + why);
  };

  KvFile kv;
  try {
    kv = KvFile::load(path);
  } catch (const Error& e) {
    throw Error(Errc::MalformedProfile, e.what()).at_line(e.line());
  }

  static const std::set<std::string> kKnown = {"bias", "display_name", "definition", "logical_pattern",
                                               "directives", "version"};
  for (const auto& [key, value] : kv.values()) {
    if (!kKnown.count(key)) throw fail("unknown key '" + key + "'");
  }

  BiasProfile p{};
  try {
    const auto id = kv.get_string("bias");
    if (!id) throw fail("missing 'bias'");
    if (parse_bias_type(*id) != expected) throw fail("bias '" + *id + "' does not match file name");
    p.bias = expected;
    p.display_name = kv.get_string("display_name").value_or("");
    p.definition = kv.get_string("definition").value_or("");
    p.logical_pattern = kv.get_strings("logical_pattern").value_or(std::vector<std::string>{});
    p.directives = kv.get_strings("directives").value_or(std::vector<std::string>{});
    p.version = kv.get_string("version").value_or("");
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedProfile) throw;
    throw fail(e.what());
  }

  if (text::trim(p.display_name).empty()) throw fail("display_name is empty");
  if (text::trim(p.definition).empty()) throw fail("definition is empty");
  if (p.logical_pattern.size() < 2) throw fail("logical_pattern needs at least 2 steps");
  if (p.directives.size() < 3) throw fail("directives needs at least 3 entries");
  for (const auto& step : p.logical_pattern) {
    if (text::trim(step).empty()) throw fail("empty logical_pattern step");
  }
  for (const auto& d : p.directives) {
    if (text::trim(d).empty()) throw fail("empty directive");
  }
  // Semantic version: three dot-separated integers.
  const auto parts = text::split(p.version, '.');
  bool semver = parts.size() == 3;
  for (const auto& part : parts) {
    semver = semver && !part.empty() && part.find_first_not_of("0123456789") == std::string::npos;
  }
  if (!semver) throw fail("version '" + p.version + "' is not MAJOR.MINOR.PATCH");
  return p;
}

}  // namespace

ProfileRegistry ProfileRegistry::load(const std::filesystem::path& dir) {
  ProfileRegistry reg;
  reg.dir_ = dir;
  std::set<std::string> names;
  for (BiasType b : kAllBiases) {
    const auto path = dir / (std::string(identifier_of(b)) + ".toml");
    if (!std::filesystem::exists(path)) {
      throw Error(Errc::MalformedProfile, path.string() + ": profile file missing");
    }
    reg.profiles_[bias_index(b)] = read_profile(path, b);
    if (!names.insert(reg.profiles_[bias_index(b)].display_name).second) {
      throw Error(Errc::MalformedProfile, path.string() + ": duplicate display_name");
    }
  }
  return reg;
}

std::filesystem::path default_profiles_dir() {
  if (const char* env = std::getenv("BIASSCOPE_PROFILES_DIR"); env && *env) return env;
  const std::filesystem::path source = BIASSCOPE_SOURCE_PROFILES_DIR;
  if (std::filesystem::exists(source)) return source;
  return BIASSCOPE_INSTALLED_PROFILES_DIR;
}

const ProfileRegistry& default_registry() {
  static const ProfileRegistry registry = ProfileRegistry::load(default_profiles_dir());
  return registry;
}

const BiasProfile& profile_of(BiasType bias) { return default_registry().profile_of(bias); }

const std::array<BiasProfile, 6>& all_profiles() { return default_registry().all_profiles(); }

}  // namespace biasscope
