#include "biasscope/promptkit.hpp"

#include "biasscope/error.hpp"
#include "biasscope/hashing.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

std::string_view identifier_of(PromptMode m) noexcept {
  return m == PromptMode::Structured ? "structured" : "basic";
}

std::optional<PromptMode> parse_prompt_mode(std::string_view id) noexcept {
  if (text::iequals(id, "structured")) return PromptMode::Structured;
  if (text::iequals(id, "basic")) return PromptMode::Basic;
  return std::nullopt;
}

std::string_view wire_name(Role r) noexcept { return r == Role::System ? "system" : "user"; }

namespace {

// Shared by both modes so comparisons isolate the effect of the directives.
constexpr std::string_view kFormatContract =
    "Output format:\n"
    "The first line of your reply must be exactly one of:\n"
    "VERDICT: YES\n"
    "VERDICT: NO\n"
    "VERDICT: UNCLEAR\n"
    "The second line must start with \"RATIONALE:\" followed by a brief explanation that refers to the text.\n"
    "Answer YES if the bias is present in the text and NO if it is absent.";

constexpr std::string_view kAmbiguityEscape =
    "If the text is ambiguous or does not give enough information to decide, answer VERDICT: UNCLEAR.";

constexpr std::string_view kUserLead = "Text to analyze:\n";

bool is_sentinel_like(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && line[i] == '\\') ++i;
  const auto rest = line.substr(i);
  return rest == kTextOpen || rest == kTextClose;
}

void require_text(std::string_view chunk_text) {
  if (text::trim(chunk_text).empty()) throw Error(Errc::EmptyText, "chunk text is empty");
}

std::string user_message(std::string_view chunk_text) {
  std::string out(kUserLead);
  out += fence_text(chunk_text);
  return out;
}

}  // namespace

std::string compute_prompt_hash(std::string_view template_version, std::string_view profile_version,
                                PromptMode mode, const std::vector<Message>& messages) {
  std::string material;
  material += template_version;
  material += '\x1f';
  material += profile_version;
  material += '\x1f';
  material += identifier_of(mode);
  for (const auto& m : messages) {
    material += '\x1e';
    material += m.content;
  }
  return sha256_hex(material);
}

Prompt make_prompt(BiasType bias, PromptMode mode, std::vector<Message> messages, std::string profile_version) {
  if (messages.empty()) throw Error(Errc::EmptyText, "prompt has no messages");
  if (messages.front().role != Role::System) throw Error(Errc::EmptyText, "first prompt message must be system");
  for (const auto& m : messages) {
    if (m.content.empty()) throw Error(Errc::EmptyText, "prompt message content is empty");
  }
  Prompt p;
  p.bias_ = bias;
  p.mode_ = mode;
  p.template_version_ = std::string(kTemplateVersion);
  p.profile_version_ = std::move(profile_version);
  p.prompt_hash_ = compute_prompt_hash(p.template_version_, p.profile_version_, mode, messages);
  p.messages_ = std::move(messages);
  return p;
}

std::string fence_text(std::string_view chunk_text) {
  std::string out(kTextOpen);
  out += '\n';
  const auto lines = text::split_lines(chunk_text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    if (is_sentinel_like(lines[i])) out += '\\';
    out += lines[i];
  }
  out += '\n';
  out += kTextClose;
  return out;
}

std::optional<std::string> unfence_text(std::string_view user_content) {
  const auto lines = text::split_lines(user_content);
  std::optional<std::size_t> open, close;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == kTextOpen) {
      if (open) return std::nullopt;
      open = i;
    } else if (lines[i] == kTextClose) {
      if (close || !open) return std::nullopt;
      close = i;
    }
  }
  if (!open || !close) return std::nullopt;

  std::string out;
  for (std::size_t i = *open + 1; i < *close; ++i) {
    if (i > *open + 1) out += '\n';
    auto line = lines[i];
    if (is_sentinel_like(line) && !line.empty() && line.front() == '\\') line.remove_prefix(1);
    out += line;
  }
  return out;
}

Prompt build_structured_prompt(const BiasProfile& profile, std::string_view chunk_text) {
  require_text(chunk_text);

  std::string sys;
  sys += "You are an analyst who examines human-written text for the cognitive bias \"" + profile.display_name +
         "\".\n\n";
  sys += "Definition of " + profile.display_name + ":\n";
  sys += profile.definition;
  sys += "\n\nReason through these steps in order:\n";
  for (std::size_t i = 0; i < profile.logical_pattern.size(); ++i) {
    sys += std::to_string(i + 1) + ". " + profile.logical_pattern[i] + "\n";
  }
  sys += "\nDirectives:\n";
  for (const auto& d : profile.directives) sys += "- " + d + "\n";
  sys += "\n";
  sys += kFormatContract;
  sys += "\n\n";
  sys += kAmbiguityEscape;

  return make_prompt(profile.bias, PromptMode::Structured,
                     {{Role::System, std::move(sys)}, {Role::User, user_message(chunk_text)}}, profile.version);
}

Prompt build_basic_prompt(const BiasProfile& profile, std::string_view chunk_text) {
  require_text(chunk_text);

  std::string sys = "Does the following text contain the cognitive bias \"" + profile.display_name + "\"?\n\n";
  sys += kFormatContract;

  return make_prompt(profile.bias, PromptMode::Basic,
                     {{Role::System, std::move(sys)}, {Role::User, user_message(chunk_text)}}, profile.version);
}

Prompt build_basic_prompt(BiasType bias, std::string_view chunk_text) {
  return build_basic_prompt(profile_of(bias), chunk_text);
}

Prompt build_prompt(PromptMode mode, const BiasProfile& profile, std::string_view chunk_text) {
  return mode == PromptMode::Structured ? build_structured_prompt(profile, chunk_text)
                                        : build_basic_prompt(profile, chunk_text);
}

WireMessages render_messages(const Prompt& prompt) {
  WireMessages out;
  out.reserve(prompt.messages().size());
  for (const auto& m : prompt.messages()) out.emplace_back(std::string(wire_name(m.role)), m.content);
  return out;
}

std::optional<BiasType> bias_named_in(std::string_view system_content, const ProfileRegistry& registry) {
  std::optional<BiasType> found;
  for (const auto& p : registry.all_profiles()) {
    if (system_content.find("\"" + p.display_name + "\"") != std::string_view::npos) {
      if (found) return std::nullopt;
      found = p.bias;
    }
  }
  return found;
}

std::string render_golden(const Prompt& prompt) {
  std::string out = "template_version: " + prompt.template_version() + "\n";
  for (const auto& m : prompt.messages()) {
    out += "### ";
    out += wire_name(m.role);
    out += "\n";
    out += m.content;
    out += "\n";
  }
  return out;
}

}  // namespace biasscope
