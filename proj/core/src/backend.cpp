#include "biasscope/backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "biasscope/error.hpp"
#include "biasscope/hashing.hpp"
#include "biasscope/heuristic.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

using nlohmann::json;

std::string_view identifier_of(BackendKind k) noexcept {
  switch (k) {
    case BackendKind::Http: return "http";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Heuristic: return "heuristic";
  }
  return "heuristic";
}

std::optional<BackendKind> parse_backend_kind(std::string_view id) noexcept {
  for (BackendKind k : {BackendKind::Http, BackendKind::Scripted, BackendKind::Heuristic}) {
    if (text::iequals(id, identifier_of(k))) return k;
  }
  return std::nullopt;
}

void BackendConfig::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(Errc::InvalidConfig, "backend '" + backend_id + "': " + why);
  };
  if (text::trim(backend_id).empty()) throw Error(Errc::InvalidConfig, "backend_id must not be empty");
  if (kind == BackendKind::Http) {
    if (!endpoint_url || endpoint_url->empty()) fail("http backends require endpoint_url");
    if (!model_name || model_name->empty()) fail("http backends require model_name");
  }
  if (kind == BackendKind::Scripted && (!fixture_path || fixture_path->empty())) {
    fail("scripted backends require fixture_path");
  }
  if (!std::isfinite(temperature) || temperature < 0.0) fail("temperature must be >= 0");
  if (max_tokens <= 0) fail("max_tokens must be positive");
  if (timeout_ms <= 0) fail("timeout_ms must be positive");
  if (max_retries < 0) fail("max_retries must be >= 0");
  if (backoff_base_ms < 0) fail("backoff_base_ms must be >= 0");
}

std::string chat_request_body(const BackendConfig& cfg, const WireMessages& messages) {
  std::string body = "{\"model\": ";
  body += json(cfg.model_name.value_or("")).dump();
  body += ", \"messages\": [";
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i) body += ", ";
    body += "{\"role\": " + json(messages[i].first).dump() + ", \"content\": " + json(messages[i].second).dump() + "}";
  }
  body += "], \"temperature\": ";
  body += json(cfg.temperature).dump();
  body += ", \"max_tokens\": ";
  body += std::to_string(cfg.max_tokens);
  body += "}";
  return body;
}

std::string extract_completion(std::string_view response_body) {
  json doc;
  try {
    doc = json::parse(response_body);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedWireResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw Error(Errc::MalformedWireResponse, "response has no choices");
  }
  const auto& first = doc["choices"][0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
    throw Error(Errc::MalformedWireResponse, "choices[0] has no message");
  }
  const auto& content = first["message"].find("content");
  if (content == first["message"].end() || !content->is_string()) {
    throw Error(Errc::MalformedWireResponse, "choices[0].message.content is not a string");
  }
  return content->get<std::string>();
}

std::string fixture_key(const WireMessages& messages) {
  std::string material;
  for (const auto& [role, content] : messages) {
    material += role;
    material.push_back('\0');
    material += content;
    material.push_back('\0');
  }
  return sha256_hex(material);
}

std::unordered_map<std::string, std::string> load_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read fixtures " + path.string());
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::Malformed, where + e.what()).at_line(line_no);
    }
    if (!rec.is_object() || !rec.contains("key") || !rec["key"].is_string() || !rec.contains("response") ||
        !rec["response"].is_string()) {
      throw Error(Errc::Malformed, where + "fixture needs string fields 'key' and 'response'").at_line(line_no);
    }
    auto key = rec["key"].get<std::string>();
    auto response = rec["response"].get<std::string>();
    auto [it, inserted] = out.emplace(key, response);
    if (!inserted && it->second != response) {
      throw Error(Errc::Malformed, where + "conflicting responses for key " + key).at_line(line_no);
    }
  }
  return out;
}

std::chrono::milliseconds nominal_backoff(int retry, std::int64_t base_ms) noexcept {
  const int shift = std::clamp(retry, 0, 30);
  return std::chrono::milliseconds(base_ms * (std::int64_t{1} << shift));
}

std::chrono::milliseconds jittered_backoff(int retry, std::int64_t base_ms, double jitter) noexcept {
  jitter = std::clamp(jitter, -1.0, 1.0);
  const double nominal = static_cast<double>(nominal_backoff(retry, base_ms).count());
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(nominal * (1.0 + 0.2 * jitter))));
}

namespace {

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

// Replays recorded completions; never invents one.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(const BackendConfig& cfg) : Backend(cfg), fixtures_(load_fixtures(*cfg.fixture_path)) {}

  RawResponse complete(const WireMessages& messages) override {
    const auto start = std::chrono::steady_clock::now();
    const auto key = fixture_key(messages);
    auto it = fixtures_.find(key);
    if (it == fixtures_.end()) throw Error(Errc::FixtureMiss, key);
    return RawResponse{it->second, elapsed_ms(start), config().backend_id, 1};
  }

 private:
  const std::unordered_map<std::string, std::string> fixtures_;
};

class HeuristicBackend final : public Backend {
 public:
  HeuristicBackend(const BackendConfig& cfg, const ProfileRegistry& registry) : Backend(cfg), registry_(registry) {}

  RawResponse complete(const WireMessages& messages) override {
    const auto start = std::chrono::steady_clock::now();
    std::optional<BiasType> bias;
    std::optional<std::string> chunk;
    for (const auto& [role, content] : messages) {
      if (role == "system" && !bias) bias = bias_named_in(content, registry_);
      if (role == "user" && !chunk) chunk = unfence_text(content);
    }
    if (!bias) throw Error(Errc::Malformed, "heuristic backend: no bias named in system message");
    if (!chunk) throw Error(Errc::Malformed, "heuristic backend: no fenced text in user message");
    const auto result = heuristic_detect(*bias, *chunk);
    return RawResponse{render_contract(result.verdict, result.rationale), elapsed_ms(start), config().backend_id, 1};
  }

 private:
  const ProfileRegistry& registry_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, const ProfileRegistry& registry) {
  cfg.validate();
  switch (cfg.kind) {
    case BackendKind::Http: return make_http_backend(cfg);
    case BackendKind::Scripted: return std::make_unique<ScriptedBackend>(cfg);
    case BackendKind::Heuristic: return std::make_unique<HeuristicBackend>(cfg, registry);
  }
  throw Error(Errc::InvalidConfig, "unknown backend kind");
}

RawResponse complete(const BackendConfig& cfg, const WireMessages& messages) {
  if (messages.empty()) throw Error(Errc::EmptyText, "no messages to send");
  return make_backend(cfg)->complete(messages);
}

}  // namespace biasscope
