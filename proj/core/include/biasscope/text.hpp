#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared across modules.
namespace biasscope::text {

bool is_valid_utf8(std::string_view bytes) noexcept;

// Decode/encode between UTF-8 and code points. decode_utf8 expects valid input.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view cps);

std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;

// CRLF and lone CR become LF.
std::string normalize_newlines(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased alphanumeric word tokens; apostrophes stay inside words.
std::vector<std::string> word_tokens(std::string_view s);

// RFC 3339 UTC timestamp with millisecond precision, e.g. 2024-05-01T12:00:00.000Z.
std::string format_rfc3339(std::chrono::system_clock::time_point tp);
std::optional<std::chrono::system_clock::time_point> parse_rfc3339(std::string_view s);

}  // namespace biasscope::text
