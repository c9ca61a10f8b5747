#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace biasscope {

// Three-valued detection outcome.
enum class Verdict { Present, Absent, Unclear };

inline constexpr std::array<Verdict, 3> kAllVerdicts = {Verdict::Present, Verdict::Absent, Verdict::Unclear};

std::string_view identifier_of(Verdict v) noexcept;  // "present" / "absent" / "unclear"
std::optional<Verdict> parse_verdict_id(std::string_view id) noexcept;
std::size_t verdict_index(Verdict v) noexcept;

enum class ParseQuality { Strict, Salvaged };

std::string_view identifier_of(ParseQuality q) noexcept;  // "strict" / "salvaged"
std::optional<ParseQuality> parse_quality_id(std::string_view id) noexcept;

struct ParsedResponse {
  Verdict verdict;
  std::string rationale;
  ParseQuality parse_quality;

  bool operator==(const ParsedResponse&) const = default;
};

// Response format contract header token for a verdict: YES / NO / UNCLEAR.
std::string_view contract_token(Verdict v) noexcept;

// Renders a verdict in the contract format ("VERDICT: YES\nRATIONALE: ...").
std::string render_contract(Verdict v, std::string_view rationale);

// Parses a model completion. Strict when the first non-blank line is the
// VERDICT header; otherwise salvages from the first 200 characters using fixed
// word lists. Throws Error(Unparseable) carrying an excerpt of the text.
ParsedResponse parse_verdict(std::string_view completion);

// Non-throwing variant.
std::optional<ParsedResponse> try_parse_verdict(std::string_view completion) noexcept;

// Word lists used by the salvage path (version-stamped).
inline constexpr std::string_view kSalvageListVersion = "1";
inline constexpr std::array<std::string_view, 3> kAffirmationWords = {"yes", "present", "detected"};
inline constexpr std::array<std::string_view, 3> kNegationWords = {"no", "absent", "none"};
inline constexpr std::array<std::string_view, 3> kAmbiguityWords = {"unclear", "ambiguous", "uncertain"};

}  // namespace biasscope
