#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biasscope/annotation.hpp"
#include "biasscope/evaluation.hpp"
#include "biasscope/runner.hpp"

namespace biasscope {

enum class JudgeSource { Labels, Annotations };

std::string_view identifier_of(JudgeSource s) noexcept;  // "labels" / "annotations"
std::optional<JudgeSource> parse_judge_source(std::string_view id) noexcept;

struct EvaluateRequest {
  std::string run_id;
  JudgeSource source = JudgeSource::Labels;
  std::optional<JudgeLevel> level;  // labels: document by default; annotations: always chunk
  std::vector<std::string> arms;    // empty = every arm in the plan
};

// Judged rows for a run, restricted to the requested arms. Annotations need a
// store; throws Error(InvalidConfig) without one and Error(InvalidPlan) for
// arms the plan does not contain.
std::vector<JudgedRecord> judged_rows(const RunStore& runs, const AnnotationStore* annotations,
                                      const EvaluateRequest& request);

EvaluationReport evaluate_run(const RunStore& runs, const AnnotationStore* annotations,
                              const EvaluateRequest& request);

// Needs at least two arms in the request (or the plan when empty).
Comparison compare_run(const RunStore& runs, const AnnotationStore* annotations, const EvaluateRequest& request);

}  // namespace biasscope
