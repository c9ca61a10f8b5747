#include "biasscope/config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include <fmt/format.h>

#include "biasscope/error.hpp"
#include "biasscope/kvfile.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

namespace {

const std::set<std::string> kTopKeys = {"runs_dir", "annotations_dir", "corpus", "profiles_dir", "console_dir"};
const std::set<std::string> kSplitterKeys = {"max_chunk_chars", "overlap_chars", "separators"};
const std::set<std::string> kBackendKeys = {"kind",        "endpoint_url", "model_name",  "prompt_mode",
                                            "temperature", "max_tokens",   "timeout_ms",  "max_retries",
                                            "api_key_env", "fixture_path", "backoff_base_ms"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::size_t non_negative(const KvFile& kv, const std::string& key, std::size_t fallback) {
  const auto v = kv.get_int(key);
  if (!v) return fallback;
  if (*v < 0) throw Error(Errc::InvalidConfig, key + " must not be negative");
  return static_cast<std::size_t>(*v);
}

}  // namespace

const Arm& CliConfig::arm(const std::string& backend_id) const {
  auto it = arms.find(backend_id);
  if (it == arms.end()) {
    throw Error(Errc::InvalidConfig,
                fmt::format("unknown arm '{}'; configured arms: {}", backend_id,
                            arm_order.empty() ? std::string("(none)") : text::join(arm_order, ", ")));
  }
  return it->second;
}

std::vector<Arm> CliConfig::resolve_arms(const std::vector<std::string>& ids) const {
  std::vector<Arm> out;
  for (const auto& id : ids) out.push_back(arm(id));
  return out;
}

CliConfig parse_config(std::string_view content, const std::filesystem::path& base_dir) {
  const KvFile kv = KvFile::parse(content);
  CliConfig cfg;

  std::set<std::string> known_sections = {"splitter"};
  for (const auto& section : kv.sections()) {
    if (section == "splitter") continue;
    if (section.rfind("backend.", 0) != 0 || section.size() == 8) {
      throw Error(Errc::InvalidConfig, "unknown section [" + section + "]");
    }
    known_sections.insert(section);
  }
  for (const auto& [key, _] : kv.values()) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) {
      if (!kTopKeys.count(key)) throw Error(Errc::InvalidConfig, "unknown key '" + key + "'");
      continue;
    }
    const auto section = key.substr(0, dot);
    const auto leaf = key.substr(dot + 1);
    const auto& allowed = section == "splitter" ? kSplitterKeys : kBackendKeys;
    if (!known_sections.count(section) || !allowed.count(leaf)) {
      throw Error(Errc::InvalidConfig, "unknown key '" + leaf + "' in [" + section + "]");
    }
  }

  if (auto v = kv.get_string("runs_dir")) cfg.runs_dir = resolve(base_dir, *v);
  else cfg.runs_dir = base_dir / cfg.runs_dir;
  if (auto v = kv.get_string("annotations_dir")) cfg.annotations_dir = resolve(base_dir, *v);
  else cfg.annotations_dir = base_dir / cfg.annotations_dir;
  if (auto v = kv.get_string("corpus")) cfg.corpus = resolve(base_dir, *v);
  else cfg.corpus = base_dir / cfg.corpus;
  if (auto v = kv.get_string("profiles_dir")) cfg.profiles_dir = resolve(base_dir, *v);
  if (auto v = kv.get_string("console_dir")) cfg.console_dir = resolve(base_dir, *v);

  cfg.splitter.max_chunk_chars = non_negative(kv, "splitter.max_chunk_chars", cfg.splitter.max_chunk_chars);
  cfg.splitter.overlap_chars = non_negative(kv, "splitter.overlap_chars", cfg.splitter.overlap_chars);
  if (auto v = kv.get_strings("splitter.separators")) cfg.splitter.separators = *v;
  cfg.splitter.validate();

  for (const auto& section : kv.sections()) {
    if (section.rfind("backend.", 0) != 0) continue;
    const std::string id = section.substr(8);
    const std::string p = section + ".";
    Arm arm;
    arm.backend.backend_id = id;
    const auto kind_id = kv.get_string(p + "kind");
    if (!kind_id) throw Error(Errc::InvalidConfig, "[" + section + "] needs kind = http|scripted|heuristic");
    const auto kind = parse_backend_kind(*kind_id);
    if (!kind) throw Error(Errc::InvalidConfig, "[" + section + "] kind must be http, scripted or heuristic");
    arm.backend.kind = *kind;
    arm.backend.endpoint_url = kv.get_string(p + "endpoint_url");
    arm.backend.model_name = kv.get_string(p + "model_name");
    if (auto v = kv.get_number(p + "temperature")) arm.backend.temperature = *v;
    if (auto v = kv.get_int(p + "max_tokens")) arm.backend.max_tokens = *v;
    if (auto v = kv.get_int(p + "timeout_ms")) arm.backend.timeout_ms = *v;
    if (auto v = kv.get_int(p + "max_retries")) arm.backend.max_retries = *v;
    if (auto v = kv.get_int(p + "backoff_base_ms")) arm.backend.backoff_base_ms = *v;
    arm.backend.api_key_env = kv.get_string(p + "api_key_env");
    if (auto v = kv.get_string(p + "fixture_path")) arm.backend.fixture_path = resolve(base_dir, *v);
    if (auto v = kv.get_string(p + "prompt_mode")) {
      const auto mode = parse_prompt_mode(*v);
      if (!mode) throw Error(Errc::InvalidConfig, "[" + section + "] prompt_mode must be structured or basic");
      arm.mode = *mode;
    }
    arm.backend.validate();
    cfg.arm_order.push_back(id);
    cfg.arms.emplace(id, std::move(arm));
  }
  return cfg;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read config " + path.string());
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    auto base = std::filesystem::absolute(path).parent_path();
    CliConfig cfg = parse_config(content, base);
    cfg.source = path;
    return cfg;
  } catch (const Error& e) {
    Error wrapped(e.code(), path.string() + ": " + std::string(e.detail()));
    if (e.line()) wrapped.at_line(e.line());
    throw wrapped;
  }
}

}  // namespace biasscope
