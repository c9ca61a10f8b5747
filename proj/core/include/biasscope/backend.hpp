#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "biasscope/promptkit.hpp"
#include "biasscope/taxonomy.hpp"

namespace biasscope {

enum class BackendKind { Http, Scripted, Heuristic };

std::string_view identifier_of(BackendKind k) noexcept;  // "http" / "scripted" / "heuristic"
std::optional<BackendKind> parse_backend_kind(std::string_view id) noexcept;

struct BackendConfig {
  std::string backend_id;
  BackendKind kind = BackendKind::Heuristic;
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_name;
  double temperature = 0.0;
  std::int64_t max_tokens = 512;
  std::int64_t timeout_ms = 60000;
  std::int64_t max_retries = 3;
  std::optional<std::string> api_key_env;
  std::optional<std::filesystem::path> fixture_path;
  // First retry delay; later retries double it.
  std::int64_t backoff_base_ms = 1000;

  // Throws Error(InvalidConfig).
  void validate() const;
};

struct RawResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  std::string backend_id;
  int attempt = 1;
};

// A shareable handle; complete() may be called from several threads.
class Backend {
 public:
  virtual ~Backend() = default;

  const BackendConfig& config() const noexcept { return config_; }
  virtual RawResponse complete(const WireMessages& messages) = 0;

 protected:
  explicit Backend(BackendConfig config) : config_(std::move(config)) {}

 private:
  BackendConfig config_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, const ProfileRegistry& registry = default_registry());

// One-shot convenience around make_backend.
RawResponse complete(const BackendConfig& cfg, const WireMessages& messages);

// Chat-completions request body with fixed field order:
// {"model": ..., "messages": [...], "temperature": ..., "max_tokens": ...}
std::string chat_request_body(const BackendConfig& cfg, const WireMessages& messages);

// choices[0].message.content of a chat-completions response body.
// Throws Error(MalformedWireResponse).
std::string extract_completion(std::string_view response_body);

// Key used by scripted fixtures: sha256 over role/content pairs, each field
// terminated by a NUL byte.
std::string fixture_key(const WireMessages& messages);

// Scripted fixture file: JSON-lines of {"key": "<hex>", "response": "..."}.
std::unordered_map<std::string, std::string> load_fixtures(const std::filesystem::path& path);

// Nominal (pre-jitter) delay before retry number `retry` (0-based):
// base * 2^retry.
std::chrono::milliseconds nominal_backoff(int retry, std::int64_t base_ms) noexcept;

// Nominal delay scaled by (1 + 0.2 * jitter), jitter clamped to [-1, 1].
std::chrono::milliseconds jittered_backoff(int retry, std::int64_t base_ms, double jitter) noexcept;

// HTTP backend with an injectable sleep, for tests that observe retry delays.
using SleepFn = std::function<void(std::chrono::milliseconds)>;
std::unique_ptr<Backend> make_http_backend(const BackendConfig& cfg, SleepFn sleep = {});

}  // namespace biasscope
