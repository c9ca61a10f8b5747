#include "biasscope/verdict.hpp"

#include <algorithm>

#include "biasscope/error.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

std::string_view identifier_of(Verdict v) noexcept {
  switch (v) {
    case Verdict::Present: return "present";
    case Verdict::Absent: return "absent";
    case Verdict::Unclear: return "unclear";
  }
  return "unclear";
}

std::optional<Verdict> parse_verdict_id(std::string_view id) noexcept {
  for (Verdict v : kAllVerdicts) {
    if (text::iequals(id, identifier_of(v))) return v;
  }
  return std::nullopt;
}

std::size_t verdict_index(Verdict v) noexcept { return static_cast<std::size_t>(v); }

std::string_view identifier_of(ParseQuality q) noexcept {
  return q == ParseQuality::Strict ? "strict" : "salvaged";
}

std::optional<ParseQuality> parse_quality_id(std::string_view id) noexcept {
  if (id == "strict") return ParseQuality::Strict;
  if (id == "salvaged") return ParseQuality::Salvaged;
  return std::nullopt;
}

std::string_view contract_token(Verdict v) noexcept {
  switch (v) {
    case Verdict::Present: return "YES";
    case Verdict::Absent: return "NO";
    case Verdict::Unclear: return "UNCLEAR";
  }
  return "UNCLEAR";
}

std::string render_contract(Verdict v, std::string_view rationale) {
  std::string out = "VERDICT: ";
  out += contract_token(v);
  out += "\nRATIONALE: ";
  out += rationale;
  return out;
}

namespace {

constexpr std::string_view kHeader = "VERDICT:";
constexpr std::string_view kRationale = "RATIONALE:";
constexpr std::size_t kSalvageWindow = 200;
constexpr std::size_t kExcerpt = 120;

std::optional<Verdict> header_verdict(std::string_view line) {
  line = text::trim(line);
  if (!text::istarts_with(line, kHeader)) return std::nullopt;
  const auto value = text::trim(line.substr(kHeader.size()));
  for (Verdict v : kAllVerdicts) {
    if (text::iequals(value, contract_token(v))) return v;
  }
  return std::nullopt;
}

std::string rationale_after_marker(std::string_view body) {
  const std::string lower = text::to_lower_ascii(body);
  const auto pos = lower.find("rationale:");
  if (pos == std::string::npos) return "";
  return std::string(text::trim(body.substr(pos + kRationale.size())));
}

template <std::size_t N>
bool contains_word(const std::vector<std::string>& tokens, const std::array<std::string_view, N>& words) {
  return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return std::find(words.begin(), words.end(), t) != words.end();
  });
}

std::string excerpt(std::string_view s) {
  std::string out(s.substr(0, kExcerpt));
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

}  // namespace

std::optional<ParsedResponse> try_parse_verdict(std::string_view completion) noexcept {
  try {
    // Strict path: first non-blank line.
    std::size_t pos = 0;
    while (pos < completion.size()) {
      auto nl = completion.find('\n', pos);
      const auto line = completion.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      if (!text::trim(line).empty()) {
        if (auto v = header_verdict(line)) {
          const auto rest = nl == std::string_view::npos ? std::string_view{} : completion.substr(nl + 1);
          return ParsedResponse{*v, rationale_after_marker(rest), ParseQuality::Strict};
        }
        break;
      }
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }

    // Salvage path.
    const auto window = completion.substr(0, std::min(kSalvageWindow, completion.size()));
    const auto tokens = text::word_tokens(window);
    const bool yes = contains_word(tokens, kAffirmationWords);
    const bool no = contains_word(tokens, kNegationWords);
    const bool unclear = contains_word(tokens, kAmbiguityWords);
    if (static_cast<int>(yes) + static_cast<int>(no) + static_cast<int>(unclear) != 1) return std::nullopt;
    const Verdict v = yes ? Verdict::Present : no ? Verdict::Absent : Verdict::Unclear;
    return ParsedResponse{v, std::string(text::trim(completion)), ParseQuality::Salvaged};
  } catch (...) {
    return std::nullopt;
  }
}

ParsedResponse parse_verdict(std::string_view completion) {
  if (auto parsed = try_parse_verdict(completion)) return *parsed;
  throw Error(Errc::Unparseable, "\"" + excerpt(completion) + "\"");
}

}  // namespace biasscope
