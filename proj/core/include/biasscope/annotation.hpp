#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasscope/corpus.hpp"
#include "biasscope/evaluation.hpp"
#include "biasscope/runner.hpp"

namespace biasscope {

enum class Phase { Phase1, Phase2 };

std::string_view identifier_of(Phase p) noexcept;  // "1" / "2"
// Accepts "1", "2", "phase1", "phase2".
std::optional<Phase> parse_phase(std::string_view id) noexcept;
std::size_t arms_for(Phase p) noexcept;  // 1 or 3

struct ModelOutput {
  std::string backend_id;
  std::optional<Verdict> verdict;  // empty when unparseable or failed
  std::optional<std::string> rationale;
  std::optional<std::string> error;
};

struct Lease {
  std::string annotator_id;
  std::chrono::system_clock::time_point expires_at;
};

struct AnnotationTask {
  std::string task_id;
  Phase phase = Phase::Phase1;
  std::string run_id;
  std::string doc_id;
  std::size_t chunk_index = 0;
  BiasType bias = BiasType::StrawMan;
  std::string sample_text;
  std::vector<ModelOutput> model_outputs;
  std::optional<Lease> lease;

  SampleKey sample() const { return {doc_id, chunk_index, bias}; }
};

std::string make_task_id(const std::string& run_id, const SampleKey& sample, Phase phase);

struct Phase1Input {
  Verdict human_verdict = Verdict::Absent;
  bool model_correct = false;
  std::optional<std::string> correction;
};

struct Phase2Input {
  Verdict human_verdict = Verdict::Absent;
  std::map<std::string, Judgment> per_model;
};

using AnnotationInput = std::variant<Phase1Input, Phase2Input>;

struct DerivedJudgment {
  std::string backend_id;
  Judgment judgment = Judgment::Incorrect;
};

struct AnnotationRecord {
  std::string task_id;
  std::string annotator_id;
  Phase phase = Phase::Phase1;
  AnnotationInput input;
  std::vector<DerivedJudgment> derived;  // judge(model verdict, human verdict) per output
  std::string submitted_at;
};

nlohmann::ordered_json task_to_json(const AnnotationTask& task);
AnnotationTask task_from_json(const nlohmann::json& j);
nlohmann::ordered_json record_to_json(const AnnotationRecord& record);
AnnotationRecord annotation_from_json(const nlohmann::json& j);
nlohmann::ordered_json input_to_json(const AnnotationInput& input);
// Throws Error(ValidationFailed) when the body does not fit the phase's shape.
AnnotationInput input_from_json(Phase phase, const nlohmann::json& j);

// Builds one task per (sample, bias) from a run's records. Phase 1 takes one
// arm, Phase 2 exactly three covering identical samples. Throws
// Error(WrongArmCount), Error(ArmSampleMismatch) or Error(InvalidPlan).
std::vector<AnnotationTask> generate_tasks(const RunPlan& plan, const std::vector<DetectionRecord>& records,
                                           const std::vector<Document>& corpus, Phase phase,
                                           const std::vector<std::string>& arms);

struct AnnotationExport {
  std::vector<AnnotationRecord> records;
  std::vector<JudgedRecord> judged;  // one row per (task, model output)
};

struct QueueProgress {
  std::size_t total = 0;
  std::size_t completed = 0;
  std::size_t remaining() const { return total - completed; }
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct AnnotationStoreOptions {
  std::chrono::seconds lease_duration = std::chrono::minutes(15);
  Clock clock;  // system clock when empty
};

// Task queue and record log for both phases, persisted as JSON lines under
// <dir>/phase<N>-tasks.jsonl and <dir>/phase<N>-records.jsonl. Leases live in
// memory only. All mutations are serialized by one mutex.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path dir, AnnotationStoreOptions options = {});

  // Appends tasks whose ids are not yet known; returns how many were new.
  std::size_t add_tasks(const std::vector<AnnotationTask>& tasks);

  // Leases the first open task to the annotator. A task already leased to the
  // same annotator is returned again with a refreshed lease.
  std::optional<AnnotationTask> next_task(const std::string& annotator_id, Phase phase);

  // Throws UnknownTask, LeaseConflict, ValidationFailed or AlreadyAnnotated.
  AnnotationRecord submit(const std::string& task_id, const std::string& annotator_id, const AnnotationInput& input);

  std::optional<AnnotationTask> task(const std::string& task_id) const;
  std::vector<AnnotationTask> tasks(Phase phase) const;
  std::vector<AnnotationRecord> records(Phase phase) const;
  QueueProgress progress(Phase phase) const;

  // Records plus judged rows; optionally limited to one run.
  AnnotationExport export_annotations(Phase phase, const std::optional<std::string>& run_id = std::nullopt) const;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct PhaseState {
    std::vector<AnnotationTask> tasks;
    std::map<std::string, std::size_t> index;
    std::map<std::string, AnnotationRecord> records;  // by task_id
    std::vector<std::string> record_order;
  };

  std::filesystem::path tasks_path(Phase p) const;
  std::filesystem::path records_path(Phase p) const;
  PhaseState& state(Phase p) { return phases_[p == Phase::Phase1 ? 0 : 1]; }
  const PhaseState& state(Phase p) const { return phases_[p == Phase::Phase1 ? 0 : 1]; }
  const AnnotationTask* find_task(const std::string& task_id, Phase* phase) const;
  std::chrono::system_clock::time_point now() const;

  std::filesystem::path dir_;
  AnnotationStoreOptions options_;
  mutable std::mutex mu_;
  PhaseState phases_[2];
};

// Judged rows from both phases for one run. Where a sample and arm were
// annotated in both phases, the Phase 2 judgment wins.
std::vector<JudgedRecord> judged_from_annotations(const AnnotationStore& store, const std::string& run_id);

}  // namespace biasscope
