// Chat-completions client over cpp-httplib.
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

#include "biasscope/backend.hpp"
#include "biasscope/error.hpp"
#include "biasscope/text.hpp"

namespace biasscope {
namespace {

struct Endpoint {
  std::string scheme_host_port;  // e.g. http://localhost:8080
  std::string base_path;         // e.g. /v1, never ending in '/'
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::InvalidConfig, "endpoint_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.scheme_host_port = url.substr(0, path_start);
  ep.base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  return ep;
}

bool is_timeout(httplib::Error err) {
  return err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout;
}

bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::string excerpt(const std::string& body) { return body.substr(0, 200); }

class HttpBackend final : public Backend {
 public:
  HttpBackend(const BackendConfig& cfg, SleepFn sleep)
      : Backend(cfg), endpoint_(parse_endpoint(*cfg.endpoint_url)), sleep_(std::move(sleep)) {
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }

  RawResponse complete(const WireMessages& messages) override {
    const auto& cfg = config();
    if (messages.empty()) throw Error(Errc::EmptyText, "no messages to send");

    httplib::Headers headers;
    if (cfg.api_key_env) {
      const char* key = std::getenv(cfg.api_key_env->c_str());
      if (!key || !*key) throw Error(Errc::MissingApiKey, *cfg.api_key_env);
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string body = chat_request_body(cfg, messages);
    const std::string path = endpoint_.base_path + "/chat/completions";
    const auto start = std::chrono::steady_clock::now();

    for (int attempt = 1;; ++attempt) {
      httplib::Client client(endpoint_.scheme_host_port);
      const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);

      auto res = client.Post(path, headers, body, "application/json");

      std::optional<Error> failure;
      bool retryable = false;
      if (!res) {
        const auto err = res.error();
        retryable = is_timeout(err);
        failure = Error(retryable ? Errc::Timeout : Errc::Transport, httplib::to_string(err));
      } else if (res->status < 200 || res->status > 299) {
        retryable = is_retryable_status(res->status);
        failure = Error(Errc::HttpStatus, std::to_string(res->status) + " " + excerpt(res->body));
      } else {
        const auto latency =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        return RawResponse{extract_completion(res->body), latency, cfg.backend_id, attempt};
      }

      if (!retryable || attempt > cfg.max_retries) throw *failure;
      sleep_(jittered_backoff(attempt - 1, cfg.backoff_base_ms, next_jitter()));
    }
  }

 private:
  double next_jitter() {
    std::lock_guard lock(rng_mu_);
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
  }

  Endpoint endpoint_;
  SleepFn sleep_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const BackendConfig& cfg, SleepFn sleep) {
  cfg.validate();
  if (cfg.kind != BackendKind::Http) throw Error(Errc::InvalidConfig, "backend '" + cfg.backend_id + "' is not http");
  return std::make_unique<HttpBackend>(cfg, std::move(sleep));
}

}  // namespace biasscope
