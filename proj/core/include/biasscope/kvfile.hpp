#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace biasscope {

// Values of the small TOML-like key/value format used for bias profiles and
// tool configuration. Supported: strings, integers, floats, booleans and
// (possibly multi-line) arrays of strings. `[a.b]` headers prefix keys.
using KvValue = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

class KvFile {
 public:
  static KvFile parse(std::string_view content);
  // Errors carry the file path in their message.
  static KvFile load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, KvValue>& values() const { return values_; }

  // Section names in first-appearance order, e.g. "backend.ours".
  const std::vector<std::string>& sections() const { return sections_; }
  // Keys that live directly under `section` (without the prefix).
  std::vector<std::string> keys_in(std::string_view section) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

 private:
  std::map<std::string, KvValue> values_;
  std::vector<std::string> sections_;
};

}  // namespace biasscope
