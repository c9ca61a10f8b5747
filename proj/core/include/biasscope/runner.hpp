#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "biasscope/backend.hpp"
#include "biasscope/corpus.hpp"
#include "biasscope/promptkit.hpp"
#include "biasscope/taxonomy.hpp"
#include "biasscope/verdict.hpp"

namespace biasscope {

// One experimental configuration: a backend queried with one prompt mode.
struct Arm {
  BackendConfig backend;
  PromptMode mode = PromptMode::Structured;
};

struct RunPlan {
  std::string run_id;
  std::filesystem::path corpus_ref;
  bool corpus_lenient = false;
  SplitterConfig splitter;
  std::vector<BiasType> biases;
  std::vector<Arm> arms;
  std::size_t max_in_flight = 4;
  std::string created_at;
  std::size_t task_count = 0;

  // Throws Error(DuplicateArm) or Error(InvalidPlan).
  void validate() const;
};

nlohmann::json plan_to_json(const RunPlan& plan);
RunPlan plan_from_json(const nlohmann::json& j);

// Identity of one detection: the store holds each key at most once.
struct TaskKey {
  std::string doc_id;
  std::size_t chunk_index = 0;
  BiasType bias = BiasType::StrawMan;
  std::string backend_id;

  auto operator<=>(const TaskKey&) const = default;
  bool operator==(const TaskKey&) const = default;
};

struct DetectionRecord {
  std::string run_id;
  std::string doc_id;
  std::size_t chunk_index = 0;
  BiasType bias = BiasType::StrawMan;
  std::string backend_id;
  PromptMode prompt_mode = PromptMode::Structured;
  std::string prompt_hash;
  std::optional<Verdict> verdict;
  std::optional<ParseQuality> parse_quality;
  std::optional<std::string> rationale;
  std::optional<std::string> error;
  std::int64_t latency_ms = 0;
  std::string created_at;

  TaskKey key() const { return {doc_id, chunk_index, bias, backend_id}; }
  bool is_unparseable() const;
};

nlohmann::json record_to_json(const DetectionRecord& r);
// Throws Error(CorruptStore) on schema violations.
DetectionRecord record_from_json(const nlohmann::json& j);

// Filesystem layout: <root>/<run_id>/plan.json and records.jsonl.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const { return root_ / run_id; }
  std::filesystem::path plan_path(const std::string& run_id) const { return run_dir(run_id) / "plan.json"; }
  std::filesystem::path records_path(const std::string& run_id) const {
    return run_dir(run_id) / "records.jsonl";
  }

  bool has_plan(const std::string& run_id) const;
  void write_plan(const RunPlan& plan) const;
  RunPlan read_plan(const std::string& run_id) const;
  // Plans of every run under the root, ordered by run_id.
  std::vector<RunPlan> list_runs() const;

 private:
  std::filesystem::path root_;
};

// Timestamp plus random suffix, e.g. 20240501T120000Z-3fa9c1.
std::string make_run_id(std::chrono::system_clock::time_point now = std::chrono::system_clock::now());

struct PlanRequest {
  std::filesystem::path corpus_ref;
  bool corpus_lenient = false;
  SplitterConfig splitter;
  std::vector<BiasType> biases;
  std::vector<Arm> arms;
  std::size_t max_in_flight = 4;
  std::optional<std::string> run_id;
};

// Loads the corpus, validates the request and writes the plan manifest.
RunPlan plan_run(const RunStore& store, const PlanRequest& request);

struct PlannedTask {
  TaskKey key;
  std::size_t arm_index = 0;
  std::string chunk_text;
};

// Deterministic order: corpus order x chunk order x bias order x arm order.
std::vector<PlannedTask> materialize_tasks(const RunPlan& plan, const std::vector<Document>& corpus);
std::vector<PlannedTask> materialize_tasks(const RunPlan& plan);

using BackendFactory = std::function<std::unique_ptr<Backend>(const BackendConfig&)>;

struct ExecuteOptions {
  const ProfileRegistry* registry = nullptr;  // default_registry() when null
  BackendFactory make_backend;                // biasscope::make_backend when empty
  // Stop after appending this many new records (the rest stays pending).
  std::optional<std::size_t> max_new_records;
  // Called under the writer lock after each append, with the appended count.
  std::function<void(const DetectionRecord&, std::size_t)> on_append;
  bool fsync_each_record = false;
};

struct RunSummary {
  std::size_t planned = 0;
  std::size_t appended = 0;  // new records in this invocation
  std::size_t skipped = 0;   // already present before this invocation
  // Totals over the whole store after this invocation.
  std::size_t completed = 0;
  std::size_t errored = 0;
  std::size_t unparseable = 0;
  std::filesystem::path store_path;
};

// Executes every planned task not already in the store. Per-task failures are
// recorded in-line; only store I/O failures throw.
RunSummary execute_run(const RunStore& store, const RunPlan& plan, const ExecuteOptions& options = {});

// Records in append order. A torn final line (no trailing newline) is
// ignored; any other invalid or duplicate line throws Error(CorruptStore).
std::vector<DetectionRecord> load_records(const RunStore& store, const std::string& run_id);

}  // namespace biasscope
