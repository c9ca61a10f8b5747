#include "biasscope/service.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "biasscope/error.hpp"
#include "biasscope/pipeline.hpp"
#include "biasscope/report.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

using nlohmann::json;
using nlohmann::ordered_json;

struct AnnotationService::Server {
  httplib::Server http;
};

namespace {

constexpr std::string_view kPlaceholderPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>biasscope</title></head>\n"
    "<body><p>The annotator console is not built. The API is available under /api/.</p></body></html>\n";

ServiceResponse json_response(int status, const ordered_json& body) { return {status, "application/json", body.dump()}; }

ServiceResponse error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, ordered_json{{"error", code}, {"message", message}});
}

int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownTask:
    case Errc::InvalidPlan: return 404;
    case Errc::LeaseConflict:
    case Errc::AlreadyAnnotated: return 409;
    case Errc::ValidationFailed:
    case Errc::WrongArmCount:
    case Errc::ArmSampleMismatch:
    case Errc::DuplicateArm:
    case Errc::EmptyInput:
    case Errc::UnknownBias: return 422;
    case Errc::Malformed: return 400;
    default: return 500;
  }
}

std::optional<std::string> param(const QueryParams& query, const std::string& key) {
  auto it = query.find(key);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(Errc::Malformed, std::string("request body is not valid JSON: ") + e.what());
  }
}

Phase phase_from(const json& value) {
  std::string id;
  if (value.is_number_integer()) {
    id = std::to_string(value.get<int>());
  } else if (value.is_string()) {
    id = value.get<std::string>();
  }
  const auto phase = parse_phase(id);
  if (!phase) throw Error(Errc::ValidationFailed, "phase must be 1 or 2");
  return *phase;
}

std::string content_type_for(const std::filesystem::path& p) {
  const auto ext = text::to_lower_ascii(p.extension().string());
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".woff2") return "font/woff2";
  return "application/octet-stream";
}

ordered_json profile_json(const BiasProfile& p) {
  return {{"bias", identifier_of(p.bias)},
          {"display_name", p.display_name},
          {"definition", p.definition},
          {"logical_pattern", p.logical_pattern},
          {"directives", p.directives},
          {"version", p.version}};
}

}  // namespace

AnnotationService::AnnotationService(ServiceOptions options)
    : options_(std::move(options)),
      runs_(options_.runs_dir),
      annotations_(options_.annotations_dir, options_.annotation),
      server_(std::make_unique<Server>()) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams query(req.params.begin(), req.params.end());
    const auto out = handle(req.method, req.path, query, req.body);
    res.status = out.status;
    if (out.status != 204) res.set_content(out.body, out.content_type);
  };
  server_->http.Get(".*", dispatch);
  server_->http.Post(".*", dispatch);
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) return server_->http.bind_to_any_port(host);
  if (!server_->http.bind_to_port(host, port)) throw Error(Errc::Io, fmt::format("cannot bind {}:{}", host, port));
  return port;
}

bool AnnotationService::listen() { return server_->http.listen_after_bind(); }

void AnnotationService::stop() {
  if (server_ && server_->http.is_running()) server_->http.stop();
}

ServiceResponse AnnotationService::handle(std::string_view method, std::string_view path, const QueryParams& query,
                                          std::string_view body) {
  try {
    return route(method, path, query, body);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

ServiceResponse AnnotationService::route(std::string_view method, std::string_view path, const QueryParams& query,
                                         std::string_view body) {
  const bool get = method == "GET";
  const bool post = method == "POST";

  if (get && path == "/api/health") return json_response(200, {{"status", "ok"}});

  if (get && path == "/api/runs") {
    ordered_json runs = ordered_json::array();
    for (const auto& plan : runs_.list_runs()) runs.push_back(ordered_json::parse(plan_to_json(plan).dump()));
    return json_response(200, runs);
  }

  if (get && path == "/api/profiles") {
    const auto& registry = options_.registry ? *options_.registry : default_registry();
    ordered_json profiles = ordered_json::array();
    for (const auto& p : registry.all_profiles()) profiles.push_back(profile_json(p));
    return json_response(200, profiles);
  }

  if (post && path == "/api/tasks/generate") {
    const json req = parse_body(body);
    if (!req.is_object() || !req.contains("run_id") || !req.at("run_id").is_string()) {
      throw Error(Errc::ValidationFailed, "run_id is required");
    }
    if (!req.contains("phase")) throw Error(Errc::ValidationFailed, "phase is required");
    if (!req.contains("arms") || !req.at("arms").is_array()) throw Error(Errc::ValidationFailed, "arms must be a list");
    const auto run_id = req.at("run_id").get<std::string>();
    const Phase phase = phase_from(req.at("phase"));
    std::vector<std::string> arms;
    for (const auto& a : req.at("arms")) {
      if (!a.is_string()) throw Error(Errc::ValidationFailed, "arms must be backend ids");
      arms.push_back(a.get<std::string>());
    }
    if (!runs_.has_plan(run_id)) throw Error(Errc::InvalidPlan, "unknown run " + run_id);
    const RunPlan plan = runs_.read_plan(run_id);
    const auto corpus = load_corpus(plan.corpus_ref, CorpusOptions{plan.corpus_lenient});
    const auto tasks = generate_tasks(plan, load_records(runs_, run_id), corpus, phase, arms);
    const auto added = annotations_.add_tasks(tasks);
    return json_response(200, {{"run_id", run_id},
                               {"phase", std::stoi(std::string(identifier_of(phase)))},
                               {"tasks", tasks.size()},
                               {"added", added}});
  }

  if (get && path == "/api/tasks/next") {
    const auto phase_id = param(query, "phase");
    const auto annotator = param(query, "annotator");
    if (!phase_id || !parse_phase(*phase_id)) throw Error(Errc::ValidationFailed, "phase must be 1 or 2");
    if (!annotator || text::trim(*annotator).empty()) throw Error(Errc::ValidationFailed, "annotator is required");
    const Phase phase = *parse_phase(*phase_id);
    const auto task = annotations_.next_task(*annotator, phase);
    if (!task) return {204, "application/json", ""};
    auto out = task_to_json(*task);
    const auto progress = annotations_.progress(phase);
    out["progress"] = {{"total", progress.total}, {"completed", progress.completed}, {"remaining", progress.remaining()}};
    return json_response(200, out);
  }

  if (post && path == "/api/annotations") {
    const json req = parse_body(body);
    if (!req.is_object() || !req.contains("task_id") || !req.at("task_id").is_string()) {
      throw Error(Errc::ValidationFailed, "task_id is required");
    }
    if (!req.contains("annotator_id") || !req.at("annotator_id").is_string()) {
      throw Error(Errc::ValidationFailed, "annotator_id is required");
    }
    if (!req.contains("input")) throw Error(Errc::ValidationFailed, "input is required");
    const auto task_id = req.at("task_id").get<std::string>();
    const auto task = annotations_.task(task_id);
    if (!task) throw Error(Errc::UnknownTask, task_id);
    const auto input = input_from_json(task->phase, req.at("input"));
    const auto record = annotations_.submit(task_id, req.at("annotator_id").get<std::string>(), input);
    return json_response(200, record_to_json(record));
  }

  constexpr std::string_view kReports = "/api/reports/";
  if (get && path.substr(0, kReports.size()) == kReports) {
    EvaluateRequest request;
    request.run_id = std::string(path.substr(kReports.size()));
    if (request.run_id.empty() || request.run_id.find('/') != std::string::npos) {
      throw Error(Errc::InvalidPlan, "unknown run " + request.run_id);
    }
    if (auto arm = param(query, "arm")) request.arms.push_back(*arm);
    if (auto against = param(query, "against")) {
      const auto source = parse_judge_source(*against);
      if (!source) throw Error(Errc::ValidationFailed, "against must be labels or annotations");
      request.source = *source;
    } else {
      request.source = judged_from_annotations(annotations_, request.run_id).empty() ? JudgeSource::Labels
                                                                                     : JudgeSource::Annotations;
    }
    if (auto level = param(query, "level")) {
      request.level = parse_judge_level(*level);
      if (!request.level) throw Error(Errc::ValidationFailed, "level must be chunk or document");
    }
    return json_response(200, report_to_json(evaluate_run(runs_, &annotations_, request)));
  }

  if (path.substr(0, 5) == "/api/") return error_response(404, "NotFound", std::string(path));
  if (get) return serve_static(path);
  return error_response(405, "MethodNotAllowed", std::string(method));
}

ServiceResponse AnnotationService::serve_static(std::string_view path) const {
  if (!options_.console_dir) {
    if (path == "/" || path == "/index.html") return {200, "text/html; charset=utf-8", std::string(kPlaceholderPage)};
    return error_response(404, "NotFound", std::string(path));
  }
  std::filesystem::path rel = std::string(path == "/" ? "/index.html" : path).substr(1);
  for (const auto& part : rel) {
    if (part == "..") return error_response(404, "NotFound", std::string(path));
  }
  auto file = *options_.console_dir / rel;
  // Single-page app: unknown paths fall back to the entry page.
  if (!std::filesystem::is_regular_file(file)) file = *options_.console_dir / "index.html";
  std::ifstream in(file, std::ios::binary);
  if (!in) return error_response(404, "NotFound", std::string(path));
  return {200, content_type_for(file), std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>())};
}

}  // namespace biasscope
