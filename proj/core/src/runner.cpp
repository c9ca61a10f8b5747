#include "biasscope/runner.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "biasscope/error.hpp"
#include "biasscope/text.hpp"
#include "jsonl.hpp"

namespace biasscope {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void RunPlan::validate() const {
  if (arms.empty()) throw Error(Errc::InvalidPlan, "a run needs at least one arm");
  std::set<std::string> ids;
  for (const auto& arm : arms) {
    arm.backend.validate();
    if (!ids.insert(arm.backend.backend_id).second) {
      throw Error(Errc::DuplicateArm, "backend_id '" + arm.backend.backend_id + "' used by more than one arm");
    }
  }
  if (biases.empty()) throw Error(Errc::InvalidPlan, "a run needs at least one bias");
  std::set<BiasType> seen;
  for (BiasType b : biases) {
    if (!seen.insert(b).second) {
      throw Error(Errc::InvalidPlan, "bias '" + std::string(identifier_of(b)) + "' listed twice");
    }
  }
  if (max_in_flight == 0) throw Error(Errc::InvalidPlan, "max_in_flight must be positive");
  splitter.validate();
}

namespace {

template <typename T>
void put_optional(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

ordered_json backend_to_json(const BackendConfig& b) {
  ordered_json j;
  j["backend_id"] = b.backend_id;
  j["kind"] = identifier_of(b.kind);
  put_optional(j, "endpoint_url", b.endpoint_url);
  put_optional(j, "model_name", b.model_name);
  j["temperature"] = b.temperature;
  j["max_tokens"] = b.max_tokens;
  j["timeout_ms"] = b.timeout_ms;
  j["max_retries"] = b.max_retries;
  put_optional(j, "api_key_env", b.api_key_env);
  if (b.fixture_path) {
    j["fixture_path"] = b.fixture_path->string();
  } else {
    j["fixture_path"] = nullptr;
  }
  j["backoff_base_ms"] = b.backoff_base_ms;
  return j;
}

BackendConfig backend_from_json(const json& j) {
  BackendConfig b;
  b.backend_id = j.at("backend_id").get<std::string>();
  const auto kind = parse_backend_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(Errc::InvalidPlan, "unknown backend kind in plan");
  b.kind = *kind;
  b.endpoint_url = opt_string(j, "endpoint_url");
  b.model_name = opt_string(j, "model_name");
  b.temperature = j.value("temperature", 0.0);
  b.max_tokens = j.value("max_tokens", std::int64_t{512});
  b.timeout_ms = j.value("timeout_ms", std::int64_t{60000});
  b.max_retries = j.value("max_retries", std::int64_t{3});
  b.api_key_env = opt_string(j, "api_key_env");
  if (auto fp = opt_string(j, "fixture_path")) b.fixture_path = *fp;
  b.backoff_base_ms = j.value("backoff_base_ms", std::int64_t{1000});
  return b;
}

}  // namespace

json plan_to_json(const RunPlan& plan) {
  ordered_json j;
  j["run_id"] = plan.run_id;
  j["created_at"] = plan.created_at;
  j["corpus_ref"] = plan.corpus_ref.string();
  j["corpus_lenient"] = plan.corpus_lenient;
  j["splitter"] = {{"max_chunk_chars", plan.splitter.max_chunk_chars},
                   {"overlap_chars", plan.splitter.overlap_chars},
                   {"separators", plan.splitter.separators}};
  auto biases = ordered_json::array();
  for (BiasType b : plan.biases) biases.push_back(identifier_of(b));
  j["biases"] = std::move(biases);
  auto arms = ordered_json::array();
  for (const auto& arm : plan.arms) {
    ordered_json a;
    a["backend"] = backend_to_json(arm.backend);
    a["prompt_mode"] = identifier_of(arm.mode);
    arms.push_back(std::move(a));
  }
  j["arms"] = std::move(arms);
  j["max_in_flight"] = plan.max_in_flight;
  j["task_count"] = plan.task_count;
  j["template_version"] = kTemplateVersion;
  return json::parse(j.dump());
}

RunPlan plan_from_json(const json& j) {
  try {
    RunPlan plan;
    plan.run_id = j.at("run_id").get<std::string>();
    plan.created_at = j.value("created_at", "");
    plan.corpus_ref = j.at("corpus_ref").get<std::string>();
    plan.corpus_lenient = j.value("corpus_lenient", false);
    const auto& s = j.at("splitter");
    plan.splitter.max_chunk_chars = s.at("max_chunk_chars").get<std::size_t>();
    plan.splitter.overlap_chars = s.at("overlap_chars").get<std::size_t>();
    plan.splitter.separators = s.at("separators").get<std::vector<std::string>>();
    for (const auto& b : j.at("biases")) plan.biases.push_back(parse_bias_type(b.get<std::string>()));
    for (const auto& a : j.at("arms")) {
      const auto mode = parse_prompt_mode(a.at("prompt_mode").get<std::string>());
      if (!mode) throw Error(Errc::InvalidPlan, "unknown prompt_mode in plan");
      plan.arms.push_back({backend_from_json(a.at("backend")), *mode});
    }
    plan.max_in_flight = j.value("max_in_flight", std::size_t{4});
    plan.task_count = j.value("task_count", std::size_t{0});
    return plan;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidPlan, std::string("malformed plan manifest: ") + e.what());
  }
}

bool DetectionRecord::is_unparseable() const {
  return error && error->rfind(std::string(errc_name(Errc::Unparseable)), 0) == 0;
}

json record_to_json(const DetectionRecord& r) {
  ordered_json j;
  j["run_id"] = r.run_id;
  j["doc_id"] = r.doc_id;
  j["chunk_index"] = r.chunk_index;
  j["bias"] = identifier_of(r.bias);
  j["backend_id"] = r.backend_id;
  j["prompt_mode"] = identifier_of(r.prompt_mode);
  j["prompt_hash"] = r.prompt_hash;
  if (r.verdict) {
    j["verdict"] = identifier_of(*r.verdict);
  } else {
    j["verdict"] = nullptr;
  }
  if (r.parse_quality) {
    j["parse_quality"] = identifier_of(*r.parse_quality);
  } else {
    j["parse_quality"] = nullptr;
  }
  put_optional(j, "rationale", r.rationale);
  put_optional(j, "error", r.error);
  j["latency_ms"] = r.latency_ms;
  j["created_at"] = r.created_at;
  return json::parse(j.dump());
}

DetectionRecord record_from_json(const json& j) {
  try {
    DetectionRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.doc_id = j.at("doc_id").get<std::string>();
    r.chunk_index = j.at("chunk_index").get<std::size_t>();
    r.bias = parse_bias_type(j.at("bias").get<std::string>());
    r.backend_id = j.at("backend_id").get<std::string>();
    const auto mode = parse_prompt_mode(j.at("prompt_mode").get<std::string>());
    if (!mode) throw Error(Errc::CorruptStore, "unknown prompt_mode");
    r.prompt_mode = *mode;
    r.prompt_hash = j.at("prompt_hash").get<std::string>();
    if (auto v = opt_string(j, "verdict")) {
      r.verdict = parse_verdict_id(*v);
      if (!r.verdict) throw Error(Errc::CorruptStore, "unknown verdict '" + *v + "'");
    }
    if (auto q = opt_string(j, "parse_quality")) {
      r.parse_quality = parse_quality_id(*q);
      if (!r.parse_quality) throw Error(Errc::CorruptStore, "unknown parse_quality '" + *q + "'");
    }
    r.rationale = opt_string(j, "rationale");
    r.error = opt_string(j, "error");
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.created_at = j.value("created_at", "");
    if (r.verdict.has_value() == r.error.has_value()) {
      throw Error(Errc::CorruptStore, "exactly one of verdict and error must be set");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptStore, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptStore) throw;
    throw Error(Errc::CorruptStore, e.what());
  }
}

bool RunStore::has_plan(const std::string& run_id) const { return std::filesystem::exists(plan_path(run_id)); }

void RunStore::write_plan(const RunPlan& plan) const {
  std::filesystem::create_directories(run_dir(plan.run_id));
  const auto final_path = plan_path(plan.run_id);
  const auto tmp = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp);
    out << plan_to_json(plan).dump(2) << '\n';
    if (!out) throw Error(Errc::Io, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, final_path);
}

RunPlan RunStore::read_plan(const std::string& run_id) const {
  std::ifstream in(plan_path(run_id), std::ios::binary);
  if (!in) throw Error(Errc::Io, "no plan manifest for run '" + run_id + "' under " + root_.string());
  try {
    return plan_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidPlan, plan_path(run_id).string() + ": " + e.what());
  }
}

std::vector<RunPlan> RunStore::list_runs() const {
  std::vector<RunPlan> plans;
  if (!std::filesystem::is_directory(root_)) return plans;
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "plan.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) plans.push_back(read_plan(id));
  return plans;
}

std::string make_run_id(std::chrono::system_clock::time_point now) {
  const auto stamp = text::format_rfc3339(now);  // 2024-05-01T12:00:00.000Z
  std::string compact;
  for (char c : stamp.substr(0, 19)) {
    if (c != '-' && c != ':') compact.push_back(c);
  }
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::uint32_t suffix;
  {
    std::lock_guard lock(mu);
    suffix = static_cast<std::uint32_t>(rng() & 0xffffff);
  }
  return fmt::format("{}Z-{:06x}", compact, suffix);
}

std::vector<PlannedTask> materialize_tasks(const RunPlan& plan, const std::vector<Document>& corpus) {
  std::vector<PlannedTask> tasks;
  for (const auto& doc : corpus) {
    for (const auto& chunk : split_document(doc, plan.splitter)) {
      for (BiasType bias : plan.biases) {
        for (std::size_t a = 0; a < plan.arms.size(); ++a) {
          tasks.push_back({{doc.doc_id, chunk.index, bias, plan.arms[a].backend.backend_id}, a, chunk.text});
        }
      }
    }
  }
  return tasks;
}

std::vector<PlannedTask> materialize_tasks(const RunPlan& plan) {
  return materialize_tasks(plan, load_corpus(plan.corpus_ref, {.lenient = plan.corpus_lenient}));
}

RunPlan plan_run(const RunStore& store, const PlanRequest& request) {
  RunPlan plan;
  plan.run_id = request.run_id.value_or(make_run_id());
  plan.corpus_ref = std::filesystem::absolute(request.corpus_ref).lexically_normal();
  plan.corpus_lenient = request.corpus_lenient;
  plan.splitter = request.splitter;
  plan.biases = request.biases;
  plan.arms = request.arms;
  plan.max_in_flight = request.max_in_flight;
  plan.created_at = text::format_rfc3339(std::chrono::system_clock::now());
  plan.validate();
  if (plan.run_id.empty() || plan.run_id.find('/') != std::string::npos || plan.run_id == "." ||
      plan.run_id == "..") {
    throw Error(Errc::InvalidPlan, "run_id '" + plan.run_id + "' is not a valid directory name");
  }
  if (store.has_plan(plan.run_id)) throw Error(Errc::InvalidPlan, "run '" + plan.run_id + "' already exists");

  plan.task_count = materialize_tasks(plan).size();
  store.write_plan(plan);
  return plan;
}

namespace {

using detail::AppendWriter;
using detail::repair_torn_tail;

void tally(const DetectionRecord& r, RunSummary& s) {
  if (r.verdict) {
    ++s.completed;
  } else if (r.is_unparseable()) {
    ++s.unparseable;
  } else {
    ++s.errored;
  }
}

}  // namespace

RunSummary execute_run(const RunStore& store, const RunPlan& plan, const ExecuteOptions& options) {
  plan.validate();
  if (!store.has_plan(plan.run_id)) {
    throw Error(Errc::InvalidPlan, "plan manifest for run '" + plan.run_id + "' has not been written");
  }
  const ProfileRegistry& registry = options.registry ? *options.registry : default_registry();

  const auto tasks = materialize_tasks(plan);
  const auto path = store.records_path(plan.run_id);
  repair_torn_tail(path);

  RunSummary summary;
  summary.planned = tasks.size();
  summary.store_path = path;

  std::set<TaskKey> done;
  for (const auto& r : load_records(store, plan.run_id)) {
    done.insert(r.key());
    tally(r, summary);
  }

  std::vector<const PlannedTask*> pending;
  for (const auto& t : tasks) {
    if (done.count(t.key)) {
      ++summary.skipped;
    } else {
      pending.push_back(&t);
    }
  }
  if (pending.empty()) return summary;

  std::vector<std::unique_ptr<Backend>> backends;
  for (const auto& arm : plan.arms) {
    backends.push_back(options.make_backend ? options.make_backend(arm.backend) : make_backend(arm.backend, registry));
  }

  AppendWriter writer(path, options.fsync_each_record);
  std::mutex write_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::optional<Error> fatal;

  auto run_task = [&](const PlannedTask& task) {
    const auto& arm = plan.arms[task.arm_index];
    DetectionRecord rec;
    rec.run_id = plan.run_id;
    rec.doc_id = task.key.doc_id;
    rec.chunk_index = task.key.chunk_index;
    rec.bias = task.key.bias;
    rec.backend_id = task.key.backend_id;
    rec.prompt_mode = arm.mode;

    const auto prompt = build_prompt(arm.mode, registry.profile_of(task.key.bias), task.chunk_text);
    rec.prompt_hash = prompt.prompt_hash();
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto raw = backends[task.arm_index]->complete(render_messages(prompt));
      rec.latency_ms = raw.latency_ms;
      const auto parsed = parse_verdict(raw.text);
      rec.verdict = parsed.verdict;
      rec.parse_quality = parsed.parse_quality;
      rec.rationale = parsed.rationale;
    } catch (const std::exception& e) {
      rec.error = e.what();
      if (rec.latency_ms == 0) {
        rec.latency_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      }
    }
    rec.created_at = text::format_rfc3339(std::chrono::system_clock::now());
    return rec;
  };

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      DetectionRecord rec;
      try {
        rec = run_task(*pending[i]);
      } catch (const std::exception& e) {
        // Prompt construction failures are per-task errors too.
        rec.run_id = plan.run_id;
        rec.doc_id = pending[i]->key.doc_id;
        rec.chunk_index = pending[i]->key.chunk_index;
        rec.bias = pending[i]->key.bias;
        rec.backend_id = pending[i]->key.backend_id;
        rec.prompt_mode = plan.arms[pending[i]->arm_index].mode;
        rec.error = e.what();
        rec.created_at = text::format_rfc3339(std::chrono::system_clock::now());
      }

      std::lock_guard lock(write_mu);
      if (stop.load()) return;
      if (options.max_new_records && summary.appended >= *options.max_new_records) {
        stop = true;
        return;
      }
      try {
        writer.append_line(record_to_json(rec).dump());
      } catch (const Error& e) {
        fatal = e;
        stop = true;
        return;
      }
      ++summary.appended;
      tally(rec, summary);
      if (options.on_append) options.on_append(rec, summary.appended);
      if (options.max_new_records && summary.appended >= *options.max_new_records) stop = true;
    }
  };

  const std::size_t threads = std::min(plan.max_in_flight, pending.size());
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  if (fatal) throw *fatal;
  return summary;
}

std::vector<DetectionRecord> load_records(const RunStore& store, const std::string& run_id) {
  const auto path = store.records_path(run_id);
  std::vector<DetectionRecord> records;
  std::set<TaskKey> keys;
  for (const auto& line : detail::read_jsonl(path)) {
    DetectionRecord rec;
    try {
      rec = record_from_json(json::parse(line.text));
    } catch (const std::exception& e) {
      if (line.torn) break;
      throw Error(Errc::CorruptStore, path.string() + ":" + std::to_string(line.number) + ": " + e.what())
          .at_line(line.number);
    }
    if (!keys.insert(rec.key()).second) {
      throw Error(Errc::CorruptStore, path.string() + ":" + std::to_string(line.number) + ": duplicate key")
          .at_line(line.number);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace biasscope
