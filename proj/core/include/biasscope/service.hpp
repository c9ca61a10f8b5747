#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "biasscope/annotation.hpp"
#include "biasscope/runner.hpp"
#include "biasscope/taxonomy.hpp"

namespace biasscope {

struct ServiceOptions {
  std::filesystem::path runs_dir;
  std::filesystem::path annotations_dir;
  // Built console assets served at "/"; a placeholder page when unset.
  std::optional<std::filesystem::path> console_dir;
  const ProfileRegistry* registry = nullptr;  // default_registry() when null
  AnnotationStoreOptions annotation;
};

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

// Annotation HTTP API. handle() is usable without a socket; listen() serves
// it over HTTP with one thread per connection.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  ServiceResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                         std::string_view body);

  // Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires bind().
  bool listen();
  void stop();

  AnnotationStore& annotations() noexcept { return annotations_; }

 private:
  ServiceResponse route(std::string_view method, std::string_view path, const QueryParams& query,
                        std::string_view body);
  ServiceResponse serve_static(std::string_view path) const;

  struct Server;
  ServiceOptions options_;
  RunStore runs_;
  AnnotationStore annotations_;
  std::unique_ptr<Server> server_;
};

}  // namespace biasscope
