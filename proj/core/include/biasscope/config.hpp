#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biasscope/backend.hpp"
#include "biasscope/corpus.hpp"
#include "biasscope/runner.hpp"

namespace biasscope {

// Tool configuration file, e.g.
//
//   runs_dir = "runs"
//   [splitter]
//   max_chunk_chars = 1500
//   [backend.ours]
//   kind = "http"
//   endpoint_url = "http://localhost:8000/v1"
//   prompt_mode = "structured"
//   api_key_env = "BIASSCOPE_API_KEY"
//
// Relative paths resolve against the file's directory. Secrets never live in
// the file; api_key_env names the variable that holds the key.
struct CliConfig {
  std::optional<std::filesystem::path> source;
  std::filesystem::path runs_dir = "runs";
  std::filesystem::path annotations_dir = "annotations";
  std::filesystem::path corpus = "corpus.jsonl";
  std::optional<std::filesystem::path> profiles_dir;
  std::optional<std::filesystem::path> console_dir;
  SplitterConfig splitter;
  std::map<std::string, Arm> arms;  // by backend_id
  std::vector<std::string> arm_order;

  // Throws Error(InvalidConfig) listing the configured arms.
  const Arm& arm(const std::string& backend_id) const;
  std::vector<Arm> resolve_arms(const std::vector<std::string>& ids) const;
};

// Throws Error(InvalidConfig) or Error(Malformed) with the line.
CliConfig load_config(const std::filesystem::path& path);
CliConfig parse_config(std::string_view content, const std::filesystem::path& base_dir);

}  // namespace biasscope
