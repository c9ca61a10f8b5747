#include "biasscope/pipeline.hpp"

#include <algorithm>

#include "biasscope/error.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

std::string_view identifier_of(JudgeSource s) noexcept {
  return s == JudgeSource::Labels ? "labels" : "annotations";
}

std::optional<JudgeSource> parse_judge_source(std::string_view id) noexcept {
  if (text::iequals(id, "labels")) return JudgeSource::Labels;
  if (text::iequals(id, "annotations")) return JudgeSource::Annotations;
  return std::nullopt;
}

namespace {

JudgeLevel level_of(const EvaluateRequest& request) {
  if (request.source == JudgeSource::Annotations) return JudgeLevel::Chunk;
  return request.level.value_or(JudgeLevel::Document);
}

// The plan with its arms narrowed to the request, in request order.
RunPlan narrowed_plan(const RunStore& runs, const EvaluateRequest& request) {
  if (!runs.has_plan(request.run_id)) throw Error(Errc::InvalidPlan, "unknown run " + request.run_id);
  RunPlan plan = runs.read_plan(request.run_id);
  if (request.arms.empty()) return plan;
  std::vector<Arm> arms;
  for (const auto& id : request.arms) {
    auto it = std::find_if(plan.arms.begin(), plan.arms.end(), [&](const Arm& a) { return a.backend.backend_id == id; });
    if (it == plan.arms.end()) {
      std::vector<std::string> known;
      for (const auto& a : plan.arms) known.push_back(a.backend.backend_id);
      throw Error(Errc::InvalidPlan,
                  "run " + plan.run_id + " has no arm '" + id + "' (arms: " + text::join(known, ", ") + ")");
    }
    arms.push_back(*it);
  }
  plan.arms = std::move(arms);
  return plan;
}

bool in_plan(const RunPlan& plan, const std::string& backend_id) {
  return std::any_of(plan.arms.begin(), plan.arms.end(),
                     [&](const Arm& a) { return a.backend.backend_id == backend_id; });
}

std::vector<JudgedRecord> judged_for(const AnnotationStore* annotations,
                                     const EvaluateRequest& request, const RunPlan& plan,
                                     const std::vector<DetectionRecord>& records) {
  std::vector<JudgedRecord> judged;
  if (request.source == JudgeSource::Labels) {
    const auto corpus = load_corpus(plan.corpus_ref, CorpusOptions{plan.corpus_lenient});
    judged = judge_against_labels(records, corpus, level_of(request));
  } else {
    if (!annotations) throw Error(Errc::InvalidConfig, "no annotation store configured");
    judged = judged_from_annotations(*annotations, request.run_id);
  }
  std::erase_if(judged, [&](const JudgedRecord& j) { return !in_plan(plan, j.backend_id); });
  return judged;
}

}  // namespace

std::vector<JudgedRecord> judged_rows(const RunStore& runs, const AnnotationStore* annotations,
                                      const EvaluateRequest& request) {
  const RunPlan plan = narrowed_plan(runs, request);
  const auto records = load_records(runs, request.run_id);
  return judged_for(annotations, request, plan, records);
}

EvaluationReport evaluate_run(const RunStore& runs, const AnnotationStore* annotations,
                              const EvaluateRequest& request) {
  const RunPlan plan = narrowed_plan(runs, request);
  auto records = load_records(runs, request.run_id);
  std::erase_if(records, [&](const DetectionRecord& r) { return !in_plan(plan, r.backend_id); });
  const auto judged = judged_for(annotations, request, plan, records);
  return build_report(plan, records, judged, std::string(identifier_of(request.source)), level_of(request));
}

Comparison compare_run(const RunStore& runs, const AnnotationStore* annotations, const EvaluateRequest& request) {
  const RunPlan plan = narrowed_plan(runs, request);
  if (plan.arms.size() < 2) throw Error(Errc::InvalidPlan, "comparison needs at least two arms");
  const auto records = load_records(runs, request.run_id);
  const auto judged = judged_for(annotations, request, plan, records);
  std::vector<std::string> ids;
  for (const auto& a : plan.arms) ids.push_back(a.backend.backend_id);
  const auto grouped = group_by_arm(judged, ids);
  return compare_arms(grouped);
}

}  // namespace biasscope
