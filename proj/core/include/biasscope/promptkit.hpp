#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biasscope/taxonomy.hpp"

namespace biasscope {

// Bumped whenever rendered prompt text changes; goldens record it.
inline constexpr std::string_view kTemplateVersion = "1.0.0";

// Lines that fence the analyzed text inside the user message.
inline constexpr std::string_view kTextOpen = "<<<TEXT";
inline constexpr std::string_view kTextClose = "TEXT>>>";

enum class PromptMode { Structured, Basic };

std::string_view identifier_of(PromptMode m) noexcept;  // "structured" / "basic"
std::optional<PromptMode> parse_prompt_mode(std::string_view id) noexcept;

enum class Role { System, User };

std::string_view wire_name(Role r) noexcept;  // "system" / "user"

struct Message {
  Role role;
  std::string content;

  bool operator==(const Message&) const = default;
};

// Rendered (role, content) pairs as sent over the wire.
using WireMessage = std::pair<std::string, std::string>;
using WireMessages = std::vector<WireMessage>;

class Prompt {
 public:
  BiasType bias() const noexcept { return bias_; }
  PromptMode mode() const noexcept { return mode_; }
  const std::vector<Message>& messages() const noexcept { return messages_; }
  const std::string& template_version() const noexcept { return template_version_; }
  const std::string& profile_version() const noexcept { return profile_version_; }
  const std::string& prompt_hash() const noexcept { return prompt_hash_; }

 private:
  friend Prompt make_prompt(BiasType, PromptMode, std::vector<Message>, std::string);
  Prompt() = default;

  BiasType bias_{};
  PromptMode mode_{};
  std::vector<Message> messages_;
  std::string template_version_;
  std::string profile_version_;
  std::string prompt_hash_;
};

// Enforces the message invariants (non-empty, system first, non-empty content).
Prompt make_prompt(BiasType bias, PromptMode mode, std::vector<Message> messages, std::string profile_version);

// sha256 over template version, profile version, mode and message contents.
std::string compute_prompt_hash(std::string_view template_version, std::string_view profile_version,
                                PromptMode mode, const std::vector<Message>& messages);

// Role framing, definition, numbered reasoning steps, directives, output
// format and the ambiguity instruction, in that order. Throws Error(EmptyText).
Prompt build_structured_prompt(const BiasProfile& profile, std::string_view chunk_text);

// Names the bias and asks for the same output format; no definition, steps or
// directives. Throws Error(EmptyText).
Prompt build_basic_prompt(const BiasProfile& profile, std::string_view chunk_text);
Prompt build_basic_prompt(BiasType bias, std::string_view chunk_text);

Prompt build_prompt(PromptMode mode, const BiasProfile& profile, std::string_view chunk_text);

WireMessages render_messages(const Prompt& prompt);

// The user message body: chunk text fenced by sentinel lines, with sentinel
// look-alike lines inside the text escaped by one extra leading backslash.
std::string fence_text(std::string_view chunk_text);

// Inverse of fence_text. Returns nullopt unless exactly one fenced block exists.
std::optional<std::string> unfence_text(std::string_view user_content);

// Finds which bias a rendered system message targets, by its quoted display name.
std::optional<BiasType> bias_named_in(std::string_view system_content, const ProfileRegistry& registry);

// Golden file layout: a template_version header line, then each message as a
// "### <role>" line followed by its content.
std::string render_golden(const Prompt& prompt);

}  // namespace biasscope
