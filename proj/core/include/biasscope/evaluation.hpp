#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biasscope/corpus.hpp"
#include "biasscope/runner.hpp"
#include "biasscope/taxonomy.hpp"
#include "biasscope/verdict.hpp"

namespace biasscope {

enum class Judgment { Correct, Incorrect };

std::string_view identifier_of(Judgment j) noexcept;  // "correct" / "incorrect"
std::optional<Judgment> parse_judgment(std::string_view id) noexcept;

// Correct iff the model produced a verdict equal to the human one. A missing
// model verdict (unparseable or failed call) is always Incorrect.
Judgment judge(std::optional<Verdict> model, Verdict human) noexcept;

// Sample identity shared by all arms. Document-level samples use chunk_index 0.
struct SampleKey {
  std::string doc_id;
  std::size_t chunk_index = 0;
  BiasType bias = BiasType::StrawMan;

  auto operator<=>(const SampleKey&) const = default;
  bool operator==(const SampleKey&) const = default;
};

struct JudgedRecord {
  SampleKey sample;
  std::string backend_id;
  std::optional<Verdict> model;
  Verdict human = Verdict::Absent;
  Judgment judgment = Judgment::Incorrect;
  bool unparseable = false;
  bool errored = false;
};

// 100 * correct / (correct + incorrect), rounded half-up to two decimals,
// computed in integer arithmetic. Throws Error(EmptyInput) when both are 0.
std::string format_accuracy(std::uint64_t correct, std::uint64_t incorrect);

struct AccuracyRow {
  BiasType bias;
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
  std::string accuracy_pct;
  std::uint64_t unparseable = 0;  // included in incorrect
};

struct AccuracyTotals {
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
  std::string accuracy_pct;
};

AccuracyRow make_row(BiasType bias, std::uint64_t correct, std::uint64_t incorrect, std::uint64_t unparseable = 0);

// One row per bias present, in enumeration order. Throws Error(EmptyInput).
std::vector<AccuracyRow> accuracy_table(std::span<const JudgedRecord> judged);
AccuracyTotals totals_of(std::span<const AccuracyRow> rows);

using VerdictCounts = std::array<std::uint64_t, 3>;          // indexed by verdict_index
using DistributionTable = std::array<VerdictCounts, 6>;      // indexed by bias_index

// Counts of parsed verdicts per (bias, verdict); records without a verdict are excluded.
DistributionTable distribution(std::span<const DetectionRecord> records);

// Present if any chunk is Present, else Unclear if any is Unclear, else Absent.
// Throws Error(EmptyInput).
Verdict aggregate_document_verdict(std::span<const Verdict> chunk_verdicts);

struct ArmJudgments {
  std::string backend_id;
  std::vector<JudgedRecord> judged;
};

struct ComparisonCell {
  std::uint64_t correct = 0;
  std::string accuracy_pct;
};

struct ComparisonRow {
  BiasType bias;
  std::vector<ComparisonCell> cells;  // one per arm, in input order
};

struct Comparison {
  std::vector<std::string> arms;
  std::vector<ComparisonRow> rows;
};

// Requires at least two arms judged over identical sample sets; throws
// Error(ArmSampleMismatch) describing the difference otherwise.
Comparison compare_arms(std::span<const ArmJudgments> arms);

enum class JudgeLevel { Chunk, Document };

std::string_view identifier_of(JudgeLevel l) noexcept;
std::optional<JudgeLevel> parse_judge_level(std::string_view id) noexcept;

// Judges detection records against corpus ground-truth labels. Samples whose
// bias is unlabeled are skipped. Document level aggregates chunk verdicts
// first; a document with any verdict-less chunk counts as unparseable/errored.
std::vector<JudgedRecord> judge_against_labels(std::span<const DetectionRecord> records,
                                               const std::vector<Document>& corpus, JudgeLevel level);

struct ArmReport {
  std::string backend_id;
  std::string prompt_mode;
  std::vector<AccuracyRow> rows;
  std::optional<AccuracyTotals> totals;
  std::uint64_t judged = 0;
  std::uint64_t unparseable = 0;  // detection records with unparseable output
  std::uint64_t errored = 0;      // detection records with failed backend calls
  DistributionTable distribution{};
};

struct EvaluationReport {
  std::string run_id;
  std::string source;  // "labels" or "annotations"
  bool auto_judged = false;
  std::string level;
  std::vector<ArmReport> arms;
  std::vector<std::string> warnings;
};

// Builds per-arm tables in the plan's arm order. Arms without judged records
// get no rows and a warning instead of a fabricated accuracy.
EvaluationReport build_report(const RunPlan& plan, std::span<const DetectionRecord> records,
                              std::span<const JudgedRecord> judged, std::string source, JudgeLevel level);

// Splits judged records by backend, keeping the given arm order.
std::vector<ArmJudgments> group_by_arm(std::span<const JudgedRecord> judged, const std::vector<std::string>& arms);

}  // namespace biasscope
