#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace biasscope {

// The six biases the detector covers, in canonical enumeration order.
enum class BiasType {
  StrawMan,
  FalseCausality,
  CircularReasoning,
  MirrorImaging,
  ConfirmationBias,
  HiddenAssumption,
};

inline constexpr std::array<BiasType, 6> kAllBiases = {
    BiasType::StrawMan,         BiasType::FalseCausality,   BiasType::CircularReasoning,
    BiasType::MirrorImaging,    BiasType::ConfirmationBias, BiasType::HiddenAssumption,
};

// Stable kebab-case identifier used in files and APIs ("straw-man", ...).
std::string_view identifier_of(BiasType bias) noexcept;

// Case-insensitive lookup; throws Error(UnknownBias) listing valid identifiers.
BiasType parse_bias_type(std::string_view identifier);

std::size_t bias_index(BiasType bias) noexcept;

struct BiasProfile {
  BiasType bias;
  std::string display_name;
  std::string definition;
  std::vector<std::string> logical_pattern;
  std::vector<std::string> directives;
  std::string version;
};

// Immutable set of six profiles loaded from `<dir>/<identifier>.toml`.
// Safe for concurrent reads once constructed.
class ProfileRegistry {
 public:
  // Throws Error(MalformedProfile) naming the offending file.
  static ProfileRegistry load(const std::filesystem::path& dir);

  const BiasProfile& profile_of(BiasType bias) const noexcept { return profiles_[bias_index(bias)]; }
  const std::array<BiasProfile, 6>& all_profiles() const noexcept { return profiles_; }

  const std::filesystem::path& directory() const noexcept { return dir_; }

 private:
  std::array<BiasProfile, 6> profiles_;
  std::filesystem::path dir_;
};

// Resolution order: $BIASSCOPE_PROFILES_DIR, the source tree, the install prefix.
std::filesystem::path default_profiles_dir();

// Process-wide registry loaded lazily from default_profiles_dir().
const ProfileRegistry& default_registry();

const BiasProfile& profile_of(BiasType bias);
const std::array<BiasProfile, 6>& all_profiles();

}  // namespace biasscope
