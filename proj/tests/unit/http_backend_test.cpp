#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "biasscope/backend.hpp"
#include "biasscope/error.hpp"

using namespace biasscope;

namespace {

std::string completion_body(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

// Local chat-completions stub; `statuses` are served in order, then 200.
class StubServer {
 public:
  explicit StubServer(std::vector<int> statuses, std::chrono::milliseconds delay = {}) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this, delay](const httplib::Request& req, httplib::Response& res) {
      const auto n = hits_++;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      if (delay.count()) std::this_thread::sleep_for(delay);
      const int status = n < statuses_.size() ? statuses_[n] : 200;
      res.status = status;
      res.set_content(status == 200 ? completion_body("VERDICT: NO\nRATIONALE: fine") : "{\"error\":\"busy\"}",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  BackendConfig config() const {
    BackendConfig c;
    c.backend_id = "stub";
    c.kind = BackendKind::Http;
    c.endpoint_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/";
    c.model_name = "m";
    c.max_retries = 3;
    c.backoff_base_ms = 1;
    c.timeout_ms = 5000;
    return c;
  }

  std::size_t hits() const { return hits_; }
  std::string last_auth() const { return last_auth_; }
  std::string last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  std::vector<int> statuses_;
  std::atomic<std::size_t> hits_{0};
  std::string last_auth_, last_body_;
  int port_ = 0;
  std::thread thread_;
};

const WireMessages kMessages = {{"system", "sys"}, {"user", "usr"}};

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST(HttpBackend, RetriesRateLimitThenSucceeds) {
  StubServer stub({429, 503});
  std::vector<std::chrono::milliseconds> sleeps;
  auto backend = make_http_backend(stub.config(), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  const auto r = backend->complete(kMessages);
  EXPECT_EQ(r.text, "VERDICT: NO\nRATIONALE: fine");
  EXPECT_EQ(r.attempt, 3);
  EXPECT_EQ(stub.hits(), 3u);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_LE(sleeps[0].count(), 2);
  EXPECT_EQ(stub.last_body(), chat_request_body(stub.config(), kMessages));
}

TEST(HttpBackend, ExhaustsRetriesOnServerErrors) {
  StubServer stub({500, 500, 500, 500, 500});
  auto cfg = stub.config();
  cfg.max_retries = 2;
  auto backend = make_http_backend(cfg, [](auto) {});
  EXPECT_EQ(error_of([&] { (void)backend->complete(kMessages); }), Errc::HttpStatus);
  EXPECT_EQ(stub.hits(), 3u);
}

TEST(HttpBackend, ClientErrorsAreNotRetried) {
  StubServer stub({400});
  auto backend = make_http_backend(stub.config(), [](auto) {});
  EXPECT_EQ(error_of([&] { (void)backend->complete(kMessages); }), Errc::HttpStatus);
  EXPECT_EQ(stub.hits(), 1u);
}

TEST(HttpBackend, ApiKeyComesFromEnvironment) {
  StubServer stub({});
  auto cfg = stub.config();
  cfg.api_key_env = "BIASSCOPE_TEST_KEY_UNSET";
  ::unsetenv("BIASSCOPE_TEST_KEY_UNSET");
  EXPECT_EQ(error_of([&] { (void)make_http_backend(cfg)->complete(kMessages); }), Errc::MissingApiKey);
  EXPECT_EQ(stub.hits(), 0u);

  cfg.api_key_env = "BIASSCOPE_TEST_KEY";
  ::setenv("BIASSCOPE_TEST_KEY", "k-123", 1);
  (void)make_http_backend(cfg)->complete(kMessages);
  EXPECT_EQ(stub.last_auth(), "Bearer k-123");
  ::unsetenv("BIASSCOPE_TEST_KEY");
}

TEST(HttpBackend, TimeoutIsReported) {
  StubServer stub({}, std::chrono::milliseconds(400));
  auto cfg = stub.config();
  cfg.timeout_ms = 50;
  cfg.max_retries = 0;
  EXPECT_EQ(error_of([&] { (void)make_http_backend(cfg, [](auto) {})->complete(kMessages); }), Errc::Timeout);
}

TEST(HttpBackend, UnreachableHostIsTransportError) {
  BackendConfig cfg;
  cfg.backend_id = "x";
  cfg.kind = BackendKind::Http;
  cfg.endpoint_url = "http://127.0.0.1:1";
  cfg.model_name = "m";
  cfg.max_retries = 0;
  EXPECT_EQ(error_of([&] { (void)make_http_backend(cfg)->complete(kMessages); }), Errc::Transport);
}
