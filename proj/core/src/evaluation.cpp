#include "biasscope/evaluation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "biasscope/error.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

std::string_view identifier_of(Judgment j) noexcept { return j == Judgment::Correct ? "correct" : "incorrect"; }

std::optional<Judgment> parse_judgment(std::string_view id) noexcept {
  if (text::iequals(id, "correct")) return Judgment::Correct;
  if (text::iequals(id, "incorrect")) return Judgment::Incorrect;
  return std::nullopt;
}

Judgment judge(std::optional<Verdict> model, Verdict human) noexcept {
  return model && *model == human ? Judgment::Correct : Judgment::Incorrect;
}

std::string format_accuracy(std::uint64_t correct, std::uint64_t incorrect) {
  const std::uint64_t total = correct + incorrect;
  if (total == 0) throw Error(Errc::EmptyInput, "accuracy is undefined for zero judged records");
  // Hundredths of a percent, rounded half-up.
  const std::uint64_t hundredths = (20000 * correct + total) / (2 * total);
  return fmt::format("{}.{:02}", hundredths / 100, hundredths % 100);
}

AccuracyRow make_row(BiasType bias, std::uint64_t correct, std::uint64_t incorrect, std::uint64_t unparseable) {
  return AccuracyRow{bias, correct, incorrect, format_accuracy(correct, incorrect), unparseable};
}

std::vector<AccuracyRow> accuracy_table(std::span<const JudgedRecord> judged) {
  if (judged.empty()) throw Error(Errc::EmptyInput, "no judged records");
  struct Tally {
    std::uint64_t correct = 0, incorrect = 0, unparseable = 0;
    bool seen = false;
  };
  std::array<Tally, 6> tallies{};
  for (const auto& j : judged) {
    auto& t = tallies[bias_index(j.sample.bias)];
    t.seen = true;
    if (j.judgment == Judgment::Correct) {
      ++t.correct;
    } else {
      ++t.incorrect;
    }
    if (j.unparseable) ++t.unparseable;
  }
  std::vector<AccuracyRow> rows;
  for (BiasType b : kAllBiases) {
    const auto& t = tallies[bias_index(b)];
    if (t.seen) rows.push_back(make_row(b, t.correct, t.incorrect, t.unparseable));
  }
  return rows;
}

AccuracyTotals totals_of(std::span<const AccuracyRow> rows) {
  AccuracyTotals t;
  for (const auto& r : rows) {
    t.correct += r.correct;
    t.incorrect += r.incorrect;
  }
  t.accuracy_pct = format_accuracy(t.correct, t.incorrect);
  return t;
}

DistributionTable distribution(std::span<const DetectionRecord> records) {
  DistributionTable table{};
  for (const auto& r : records) {
    if (r.verdict) ++table[bias_index(r.bias)][verdict_index(*r.verdict)];
  }
  return table;
}

Verdict aggregate_document_verdict(std::span<const Verdict> chunk_verdicts) {
  if (chunk_verdicts.empty()) throw Error(Errc::EmptyInput, "no chunk verdicts to aggregate");
  const auto has = [&](Verdict v) {
    return std::find(chunk_verdicts.begin(), chunk_verdicts.end(), v) != chunk_verdicts.end();
  };
  if (has(Verdict::Present)) return Verdict::Present;
  if (has(Verdict::Unclear)) return Verdict::Unclear;
  return Verdict::Absent;
}

namespace {

std::string describe(const SampleKey& k) {
  return fmt::format("{}#{}/{}", k.doc_id.substr(0, 12), k.chunk_index, identifier_of(k.bias));
}

}  // namespace

Comparison compare_arms(std::span<const ArmJudgments> arms) {
  if (arms.size() < 2) throw Error(Errc::EmptyInput, "comparison needs at least two arms");

  std::vector<std::set<SampleKey>> samples;
  for (const auto& arm : arms) {
    std::set<SampleKey> keys;
    for (const auto& j : arm.judged) keys.insert(j.sample);
    samples.push_back(std::move(keys));
  }
  for (std::size_t a = 1; a < arms.size(); ++a) {
    if (samples[a] == samples[0]) continue;
    std::vector<SampleKey> missing, extra;
    std::set_difference(samples[0].begin(), samples[0].end(), samples[a].begin(), samples[a].end(),
                        std::back_inserter(missing));
    std::set_difference(samples[a].begin(), samples[a].end(), samples[0].begin(), samples[0].end(),
                        std::back_inserter(extra));
    std::string details = fmt::format("arm '{}' differs from '{}': {} samples missing, {} extra",
                                      arms[a].backend_id, arms[0].backend_id, missing.size(), extra.size());
    if (!missing.empty()) details += " (first missing " + describe(missing.front()) + ")";
    if (!extra.empty()) details += " (first extra " + describe(extra.front()) + ")";
    throw Error(Errc::ArmSampleMismatch, details);
  }

  Comparison out;
  std::vector<std::vector<AccuracyRow>> tables;
  for (const auto& arm : arms) {
    out.arms.push_back(arm.backend_id);
    tables.push_back(accuracy_table(arm.judged));
  }
  // Identical sample sets imply identical bias rows across arms.
  for (std::size_t r = 0; r < tables[0].size(); ++r) {
    ComparisonRow row{tables[0][r].bias, {}};
    for (const auto& table : tables) row.cells.push_back({table[r].correct, table[r].accuracy_pct});
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string_view identifier_of(JudgeLevel l) noexcept { return l == JudgeLevel::Chunk ? "chunk" : "document"; }

std::optional<JudgeLevel> parse_judge_level(std::string_view id) noexcept {
  if (text::iequals(id, "chunk")) return JudgeLevel::Chunk;
  if (text::iequals(id, "document")) return JudgeLevel::Document;
  return std::nullopt;
}

std::vector<JudgedRecord> judge_against_labels(std::span<const DetectionRecord> records,
                                               const std::vector<Document>& corpus, JudgeLevel level) {
  std::map<std::string, const Document*> docs;
  for (const auto& d : corpus) docs.emplace(d.doc_id, &d);

  auto label_of = [&](const std::string& doc_id, BiasType bias) -> std::optional<Verdict> {
    auto it = docs.find(doc_id);
    if (it == docs.end() || !it->second->ground_truth) return std::nullopt;
    return it->second->ground_truth->label_for(bias);
  };

  std::vector<JudgedRecord> out;
  if (level == JudgeLevel::Chunk) {
    for (const auto& r : records) {
      const auto human = label_of(r.doc_id, r.bias);
      if (!human) continue;
      out.push_back({{r.doc_id, r.chunk_index, r.bias}, r.backend_id, r.verdict, *human, judge(r.verdict, *human),
                     r.is_unparseable(), !r.verdict && !r.is_unparseable()});
    }
    return out;
  }

  struct Group {
    std::vector<Verdict> verdicts;
    bool unparseable = false;
    bool errored = false;
  };
  // Keyed by (backend, doc, bias); std::map keeps output deterministic.
  std::map<std::tuple<std::string, std::string, BiasType>, Group> groups;
  for (const auto& r : records) {
    if (!label_of(r.doc_id, r.bias)) continue;
    auto& g = groups[{r.backend_id, r.doc_id, r.bias}];
    if (r.verdict) {
      g.verdicts.push_back(*r.verdict);
    } else if (r.is_unparseable()) {
      g.unparseable = true;
    } else {
      g.errored = true;
    }
  }
  for (const auto& [key, g] : groups) {
    const auto& [backend, doc_id, bias] = key;
    const Verdict human = *label_of(doc_id, bias);
    std::optional<Verdict> model;
    if (!g.unparseable && !g.errored) model = aggregate_document_verdict(g.verdicts);
    out.push_back({{doc_id, 0, bias}, backend, model, human, judge(model, human), g.unparseable,
                   g.errored && !g.unparseable});
  }
  return out;
}

std::vector<ArmJudgments> group_by_arm(std::span<const JudgedRecord> judged, const std::vector<std::string>& arms) {
  std::vector<ArmJudgments> out;
  for (const auto& id : arms) out.push_back({id, {}});
  for (const auto& j : judged) {
    for (auto& a : out) {
      if (a.backend_id == j.backend_id) {
        a.judged.push_back(j);
        break;
      }
    }
  }
  return out;
}

EvaluationReport build_report(const RunPlan& plan, std::span<const DetectionRecord> records,
                              std::span<const JudgedRecord> judged, std::string source, JudgeLevel level) {
  EvaluationReport report;
  report.run_id = plan.run_id;
  report.source = std::move(source);
  report.auto_judged = report.source == "labels";
  report.level = std::string(identifier_of(level));

  std::vector<std::string> ids;
  for (const auto& arm : plan.arms) ids.push_back(arm.backend.backend_id);
  const auto grouped = group_by_arm(judged, ids);

  for (std::size_t a = 0; a < plan.arms.size(); ++a) {
    ArmReport arm;
    arm.backend_id = ids[a];
    arm.prompt_mode = std::string(identifier_of(plan.arms[a].mode));
    arm.judged = grouped[a].judged.size();

    std::vector<DetectionRecord> own;
    for (const auto& r : records) {
      if (r.backend_id != arm.backend_id) continue;
      own.push_back(r);
      if (r.is_unparseable()) {
        ++arm.unparseable;
      } else if (!r.verdict) {
        ++arm.errored;
      }
    }
    arm.distribution = distribution(own);

    if (grouped[a].judged.empty()) {
      report.warnings.push_back("arm '" + arm.backend_id + "' has no judged records; accuracy omitted");
    } else {
      arm.rows = accuracy_table(grouped[a].judged);
      arm.totals = totals_of(arm.rows);
      for (BiasType b : plan.biases) {
        const bool has_row =
            std::any_of(arm.rows.begin(), arm.rows.end(), [&](const AccuracyRow& r) { return r.bias == b; });
        if (!has_row) {
          report.warnings.push_back("arm '" + arm.backend_id + "': no judged records for " +
                                    std::string(identifier_of(b)) + "; row omitted");
        }
      }
    }
    report.arms.push_back(std::move(arm));
  }
  return report;
}

}  // namespace biasscope
